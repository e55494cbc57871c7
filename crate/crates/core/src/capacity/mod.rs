//! Capacity measures of component and composite function classes.
//!
//! Logarithms are natural unless a formula id says otherwise; formulas that
//! carry a base-2 logarithm in their original statement keep it and say so
//! in their id (e.g. `entropy-inf-fat/log2-exponent`).

mod decompose;
mod dims;
mod entropy;
mod net;
mod rademacher;

pub use decompose::{
    entropy_decompose_pws, entropy_decompose_switching, pointwise_max_family,
    pointwise_min_family, product_net_pws, pws_family, switching_loss_family, trace_size,
    PwsDecomposition,
};
pub use dims::{
    fat_shattering_linear, growth_linear_classifiers, growth_natarajan,
};
pub use entropy::{
    entropy_inf_fat, entropy_inf_kernel, entropy_inf_linear_finite_d, entropy_l2_dimfree,
    entropy_pws, PwsEntropyVariant,
};
pub use net::{exact_min_cover, greedy_net, is_proper_net, MAX_EXACT_COVER};
pub use rademacher::{
    rademacher_enumerate, rademacher_exact, rademacher_linear_bound, rademacher_mc, McEstimate,
    MAX_EXACT_RADEMACHER,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Kernel;

/// Metric entropy `ε ↦ ln N(ε)` of a component class.
pub type EntropyFn<'a> = &'a dyn Fn(f64) -> f64;

/// Description of a component class `F_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum ComponentClassSpec {
    /// `{x ↦ ⟨w, x⟩ : ‖w‖₂ ≤ r_w}` on inputs with `‖x‖₂ ≤ r_x`.
    Linear { d: usize, r_x: f64, r_w: f64 },
    /// RKHS ball of radius `r_h`; `r_x = sup_x sqrt(K(x, x))`.
    Kernel { kernel: Kernel, r_x: f64, r_h: f64 },
    /// Fat-shattering dimension at most `alpha ε^{-beta}`.
    FatPoly { alpha: f64, beta: f64 },
}

impl ComponentClassSpec {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            ComponentClassSpec::Linear { d, r_x, r_w } => {
                if d == 0 {
                    return Err(Error::param("input dimension d must be >= 1"));
                }
                pos(r_x, "R_x")?;
                pos(r_w, "R_w")
            }
            ComponentClassSpec::Kernel { kernel, r_x, r_h } => {
                kernel.validate()?;
                pos(r_x, "R_x")?;
                pos(r_h, "R_H")
            }
            ComponentClassSpec::FatPoly { alpha, beta } => {
                pos(alpha, "alpha")?;
                if !(beta >= 1.0 && beta.is_finite()) {
                    return Err(Error::param(format!("beta must be >= 1, got {beta}")));
                }
                Ok(())
            }
        }
    }

    /// Integer bound on the fat-shattering dimension at scale `eps`.
    pub fn fat_at(&self, eps: f64) -> u64 {
        match *self {
            ComponentClassSpec::Linear { r_x, r_w, .. } => floor_dim((r_x * r_w / eps).powi(2)),
            ComponentClassSpec::Kernel { r_x, r_h, .. } => floor_dim((r_x * r_h / eps).powi(2)),
            ComponentClassSpec::FatPoly { alpha, beta } => floor_dim(alpha * eps.powf(-beta)),
        }
    }
}

pub(crate) fn floor_dim(v: f64) -> u64 {
    if v.is_nan() || v <= 0.0 {
        0
    } else if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v.floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityKind {
    Rademacher,
    Fat,
    Entropy,
    Growth,
    Cover,
}

/// A capacity value together with the formula that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub kind: CapacityKind,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub formula_id: String,
    /// Standard error, for Monte Carlo estimates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl CapacityReport {
    pub fn new(kind: CapacityKind, value: f64, formula_id: impl Into<String>) -> Self {
        CapacityReport {
            kind,
            value,
            scale: None,
            n: None,
            formula_id: formula_id.into(),
            stderr: None,
        }
    }

    pub fn at_scale(mut self, eps: f64) -> Self {
        self.scale = Some(eps);
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }
}

/// A finite class, each function given by its values on a fixed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteClass {
    rows: Vec<Vec<f64>>,
}

impl FiniteClass {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::input("finite class must contain at least one function"));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::input("functions must be evaluated on at least one point"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("all functions must share the sample length"));
        }
        Ok(FiniteClass { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sample length `n`.
    pub fn sample_len(&self) -> usize {
        self.rows[0].len()
    }

    /// Largest pairwise distance under `q`.
    pub fn diameter(&self, q: crate::data::Norm) -> f64 {
        let mut d = 0.0_f64;
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[..i] {
                d = d.max(q.dist(a, b));
            }
        }
        d
    }

    /// Copy without exact duplicate rows (first occurrence kept).
    pub fn dedup(&self) -> FiniteClass {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for r in &self.rows {
            if !rows.iter().any(|s| s == r) {
                rows.push(r.clone());
            }
        }
        FiniteClass { rows }
    }
}
