//! Synthetic data, mode-count selection, bound coverage and rate studies.
//!
//! Every experiment is a pure function of its configuration and seed;
//! parallel work is collected in a fixed order.

mod coverage;
mod rate;
mod srm;
mod synthetic;

pub use coverage::{validate_coverage, CoverageConfig, CoverageReport};
pub use rate::{rate_study, rate_study_formula, RateConfig, RateReport};
pub use srm::{argmin_first, select_modes_srm, SrmReport, SrmRow};
pub use synthetic::{generate_synthetic, Synthetic, SyntheticKind, SyntheticSpec};

use serde::{Deserialize, Serialize};

use crate::bounds::RiskFormula;
use crate::data::{empirical_lp_risk, empirical_switching_risk, Dataset, LossParams};
use crate::error::Result;
use crate::learn::{fit_pws, fit_switching_linear, FitOptions, FitResult};
use crate::models::Model;

/// Which learner an experiment fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Switching,
    Pws,
}

impl ModelKind {
    /// Switching fits for switching bounds (and the two degenerate
    /// formulas), PWS fits otherwise.
    pub fn for_formula(f: &RiskFormula) -> Self {
        match f {
            RiskFormula::Trivial | RiskFormula::Empirical => ModelKind::Switching,
            f if f.is_switching() => ModelKind::Switching,
            _ => ModelKind::Pws,
        }
    }
}

/// Fits `kind`, capping component norms at the formula's class radius
/// unless `opts` already sets a cap, so the fitted model lies in the class
/// the bound is stated for.
pub(crate) fn fit_for(
    kind: ModelKind,
    formula: &RiskFormula,
    data: &Dataset,
    modes: usize,
    opts: &FitOptions,
) -> Result<FitResult> {
    let opts = FitOptions {
        norm_cap: opts.norm_cap.or(formula.component_radius()),
        ..*opts
    };
    match kind {
        ModelKind::Switching => fit_switching_linear(data, modes, &opts),
        ModelKind::Pws => fit_pws(data, modes, &opts),
    }
}

/// Per-point clipped losses of a model on a sample (switching loss for
/// switching models).
pub(crate) fn pointwise_losses(model: &Model, data: &Dataset, loss: LossParams) -> Result<Vec<f64>> {
    match model {
        Model::Switching(m) => {
            let preds = m.predict_dataset(data)?;
            Ok((0..data.len())
                .map(|i| {
                    let ts: Vec<f64> = preds.iter().map(|p| p[i]).collect();
                    loss.switching_loss(data.ys()[i], &ts)
                })
                .collect())
        }
        Model::Pws(m) => Ok(m
            .predict_dataset(data)?
            .iter()
            .zip(data.ys())
            .map(|(t, y)| loss.loss(*y, *t))
            .collect()),
    }
}

/// Empirical ℓp risk of a model: switching risk for switching models, PWS
/// risk for PWS models.
pub fn model_risk(model: &Model, data: &Dataset, loss: LossParams) -> Result<f64> {
    match model {
        Model::Switching(m) => empirical_switching_risk(&m.predict_dataset(data)?, data, loss),
        Model::Pws(m) => empirical_lp_risk(&m.predict_dataset(data)?, data, loss),
    }
}
