//! Least-squares learners for switching and PWS models.
//!
//! All learners minimize the empirical squared loss (`p = 2`). Switching
//! models are fitted by alternating minimization from random assignments;
//! PWS models add a linear classifier on top of a switching fit.

mod alternating;
mod exact;
mod pws;
mod solve;

pub use alternating::{fit_switching_kernel, fit_switching_linear};
pub use exact::{fit_switching_exact, MAX_EXACT_ASSIGNMENTS};
pub use pws::fit_pws;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::Model;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once an iteration lowers the objective by less than this.
    pub tol: f64,
    pub seed: u64,
    /// Radius of the norm ball components are projected onto after every
    /// refit (`R_w` or `R_H`).
    pub norm_cap: Option<f64>,
    /// Ridge strength relative to `trace(XᵀX)` (or the Gram trace).
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 10,
            max_iters: 200,
            tol: 1e-12,
            seed: 0,
            norm_cap: None,
            ridge: 1e-10,
        }
    }
}

impl FitOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_norm_cap(mut self, cap: Option<f64>) -> Self {
        self.norm_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::param("restarts must be >= 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::param(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        if let Some(cap) = self.norm_cap {
            if !(cap > 0.0) {
                return Err(Error::param(format!("norm cap must be positive, got {cap}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: Model,
    /// Empirical risk of the returned (clipped) model on the training data:
    /// the switching risk for switching models, the PWS risk for PWS models.
    pub objective: f64,
    /// The same risk without clipping, i.e. the least-squares objective.
    pub raw_objective: f64,
    /// Unclipped objective after every iteration of the selected restart.
    pub history: Vec<f64>,
    /// Mode of every training point (best-fitting mode for switching
    /// models, classifier output for PWS models).
    pub assignments: Vec<usize>,
    pub iterations: usize,
    pub restarts_used: usize,
    /// Whether some component was projected onto the norm ball.
    pub projected: bool,
    /// Whether the objective was nonincreasing in every restart.
    pub monotone: bool,
    /// Switching objective of the stage-one fit (PWS models only).
    pub switching_objective: Option<f64>,
}

fn check_fit_input(data: &Dataset, modes: usize) -> Result<()> {
    if modes == 0 {
        return Err(Error::param("number of modes C must be >= 1"));
    }
    if modes > data.len() {
        return Err(Error::param(format!(
            "number of modes C = {modes} exceeds the sample size {}",
            data.len()
        )));
    }
    Ok(())
}

/// Whether `history` never increases beyond floating-point roundoff.
pub(crate) fn is_nonincreasing(history: &[f64]) -> bool {
    history
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1e-300))
}
