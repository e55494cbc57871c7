//! Learning and certifying switching and piecewise smooth (PWS) regression
//! models.
//!
//! The crate is organised bottom-up:
//!
//! - [`data`]: datasets, clipping, ℓp and switching risks, empirical pseudo-metrics.
//! - [`models`]: linear classifiers, linear/kernel components, PWS and switching predictors.
//! - [`capacity`]: Rademacher complexities, combinatorial dimensions, metric
//!   entropy evaluators, covering-number decompositions and ε-nets.
//! - [`bounds`]: risk bounds, chaining, and the closed-form Rademacher bounds
//!   for linear, kernel and fat-shattering component classes.
//! - [`learn`]: empirical risk minimization by alternating minimization,
//!   with exhaustive oracles for tiny instances.
//! - [`experiments`]: synthetic data, mode-count selection, coverage and
//!   rate studies.
//! - [`cli`]: the `switchrisk` command-line front end.
//!
//! All outputs live on the canonical scale `M = 1/2`: targets are rescaled
//! into `[-1/2, 1/2]` so every ℓp loss of a clipped prediction is in `[0, 1]`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod capacity;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiments;
pub mod learn;
pub mod models;
pub mod rng;

pub use error::{Error, Result};

/// Canonical output half-range after rescaling.
pub const HALF_RANGE: f64 = 0.5;
