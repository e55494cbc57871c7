//! Generalization bounds: base risk bounds, chaining evaluators and the
//! closed-form Rademacher bounds of switching and PWS classes.
//!
//! Every bound is a deterministic formula. Risk bounds return a
//! [`BoundReport`] that echoes its inputs; Rademacher bounds return plain
//! numbers and are composed into risk bounds by [`RiskFormula`].
//!
//! | formula id | meaning |
//! |---|---|
//! | `general` | `emp + 2 rad + conf` |
//! | `lp` | `emp + 2p rad + conf` |
//! | `switching-linear` | switching linear class, control `2pC R_x R_w / √n` |
//! | `switching-kernel-rad` | same with an RKHS ball of radius `R_H` |
//! | `switching-linear-chained` | chained bound for switching linear classes |
//! | `switching-kernel` | chained bound for switching kernel classes |
//! | `switching-fatpoly` | chained bound for switching classes with `fat(ε) ≤ α ε^{-β}` |
//! | `pws-general` | chained bound for PWS classes with `fat(ε) ≤ α ε^{-β}` |
//! | `pws-kernel` | `pws-general` with `α = R_x² R_H²`, `β = 2` |
//! | `pwa` | piecewise affine classes, `N = ⌈log₂ √n⌉` |
//! | `pwa-relaxed` | relaxed closed form of `pwa` |
//! | `trivial` | the constant bound 1 |
//! | `empirical` | the empirical risk alone (not a valid bound) |
//!
//! Ids of fat-polynomial bounds with `β < 2` carry a `/direct-sum` suffix:
//! the chaining sum is evaluated term by term rather than in closed form.

mod apps;
mod chaining;
mod risk;

pub use apps::{
    rad_bound_pwa, rad_bound_pwa_relaxed, rad_bound_pws_general, rad_bound_pws_kernel,
    rad_bound_switching_fatpoly, rad_bound_switching_kernel, rad_bound_switching_linear_chained,
    switching_kernel_routes, switching_linear_routes, RouteComparison,
};
pub use chaining::{chain_best, chain_finite, chain_integral, ChainBest, ChainIntegral, MAX_LEVELS};
pub use risk::{
    confidence_term, risk_bound_general, risk_bound_lp, risk_bound_switching_kernel,
    risk_bound_switching_linear, RiskFormula,
};

use serde::{Deserialize, Serialize};

use crate::data::ScaleInfo;
use crate::error::{Error, Result};

/// Inputs a bound was evaluated with.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<u32>,
    /// Rademacher value fed to the bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rademacher: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<RiskFormula>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula_id: String,
    pub empirical_risk: f64,
    pub control_term: f64,
    pub confidence_term: f64,
    pub raw_total: f64,
    /// `min(raw_total, 1)`; losses never exceed 1 at `M = 1/2`.
    pub clamped_total: f64,
    pub inputs: BoundInputs,
    #[serde(default)]
    pub scale: ScaleInfo,
}

impl BoundReport {
    pub(crate) fn assemble(
        formula_id: impl Into<String>,
        empirical_risk: f64,
        control_term: f64,
        confidence_term: f64,
        inputs: BoundInputs,
    ) -> Self {
        let raw_total = empirical_risk + control_term + confidence_term;
        BoundReport {
            formula_id: formula_id.into(),
            empirical_risk,
            control_term,
            confidence_term,
            raw_total,
            clamped_total: raw_total.min(1.0),
            inputs,
            scale: ScaleInfo::default(),
        }
    }

    pub fn with_scale(mut self, scale: ScaleInfo) -> Self {
        self.scale = scale;
        self
    }

    /// Clamped total re-expressed in the units of the raw targets, for an
    /// ℓp bound.
    pub fn clamped_total_raw_units(&self, p: f64) -> f64 {
        self.scale.lp_to_raw(self.clamped_total, p)
    }
}

/// Candidate with the smallest clamped total; ties go to the first.
pub fn best_bound(candidates: &[BoundReport]) -> Result<&BoundReport> {
    let mut best = candidates
        .first()
        .ok_or_else(|| Error::input("at least one candidate bound is required"))?;
    for c in &candidates[1..] {
        if c.clamped_total < best.clamped_total {
            best = c;
        }
    }
    Ok(best)
}

/// Tab-separated `(n, value)` series with a one-line header.
pub fn grid_tsv(ns: &[usize], value: impl Fn(usize) -> Result<f64>) -> Result<String> {
    let mut out = String::from("n\tvalue\n");
    for &n in ns {
        out.push_str(&format!("{n}\t{}\n", value(n)?));
    }
    Ok(out)
}

pub(crate) fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("sample size n must be >= 1"));
    }
    Ok(n as f64)
}

pub(crate) fn check_pos(v: f64, name: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(format!("{name} must be positive, got {v}")))
    }
}

pub(crate) fn check_modes(c: usize) -> Result<f64> {
    if c == 0 {
        return Err(Error::param("number of modes C must be >= 1"));
    }
    Ok(c as f64)
}
