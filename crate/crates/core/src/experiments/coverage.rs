use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_for, generate_synthetic, model_risk, pointwise_losses, ModelKind, SyntheticSpec};
use crate::bounds::RiskFormula;
use crate::data::LossParams;
use crate::error::{Error, Result};
use crate::learn::FitOptions;
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    /// Training distribution; `spec.n` is the training size and `spec.seed`
    /// the experiment seed.
    pub spec: SyntheticSpec,
    /// Number of modes fitted.
    pub modes: usize,
    pub trials: usize,
    pub delta: f64,
    pub formula: RiskFormula,
    #[serde(default = "default_test_n")]
    pub test_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(default)]
    pub fit: FitOptions,
}

fn default_test_n() -> usize {
    50_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub formula_id: String,
    pub trials: usize,
    /// Trials where the clamped bound fell below the estimated true risk by
    /// more than two standard errors.
    pub violations: usize,
    pub coverage: f64,
    pub delta: f64,
    /// Mean of `bound - estimated true risk`.
    pub mean_slack: f64,
    pub mean_bound: f64,
    pub mean_true_risk: f64,
    pub mean_empirical_risk: f64,
}

struct Trial {
    bound: f64,
    emp: f64,
    risk: f64,
    stderr: f64,
}

fn run_trial(cfg: &CoverageConfig, kind: ModelKind, loss: LossParams, t: u64) -> Result<Trial> {
    let train = generate_synthetic(&cfg.spec.with_seed(derive_seed(derive_seed(cfg.spec.seed, t), 0)))?;
    let test_spec = cfg
        .spec
        .with_seed(derive_seed(derive_seed(cfg.spec.seed, t), 1))
        .with_n(cfg.test_n);
    let test = generate_synthetic(&test_spec)?;
    let opts = cfg.fit.with_seed(derive_seed(derive_seed(cfg.spec.seed, t), 2));
    let fit = fit_for(kind, &cfg.formula, &train.data, cfg.modes, &opts)?;
    let emp = model_risk(&fit.model, &train.data, loss)?;
    let bound = cfg.formula.evaluate(emp, cfg.modes, train.data.len(), cfg.delta)?.clamped_total;
    let losses = pointwise_losses(&fit.model, &test.data, loss)?;
    let m = losses.len() as f64;
    let risk = losses.iter().sum::<f64>() / m;
    let var = losses.iter().map(|l| (l - risk).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    Ok(Trial {
        bound,
        emp,
        risk,
        stderr: (var / m).sqrt(),
    })
}

/// Monte Carlo check of a bound's guarantee: fresh training sample, fit,
/// bound, and a large independent test sample per trial.
pub fn validate_coverage(cfg: &CoverageConfig) -> Result<CoverageReport> {
    if cfg.trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }
    if cfg.test_n < 2 {
        return Err(Error::param("test_n must be >= 2"));
    }
    cfg.spec.validate()?;
    cfg.fit.validate()?;
    let kind = cfg.model.unwrap_or_else(|| ModelKind::for_formula(&cfg.formula));
    let loss = LossParams::new(cfg.formula.p())?;
    let trials: Vec<Trial> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, kind, loss, t))
        .collect::<Result<_>>()?;
    let k = trials.len() as f64;
    let violations = trials.iter().filter(|t| t.bound < t.risk - 2.0 * t.stderr).count();
    let mean = |f: &dyn Fn(&Trial) -> f64| trials.iter().map(f).sum::<f64>() / k;
    Ok(CoverageReport {
        formula_id: cfg.formula.id(),
        trials: trials.len(),
        violations,
        coverage: 1.0 - violations as f64 / k,
        delta: cfg.delta,
        mean_slack: mean(&|t| t.bound - t.risk),
        mean_bound: mean(&|t| t.bound),
        mean_true_risk: mean(&|t| t.risk),
        mean_empirical_risk: mean(&|t| t.emp),
    })
}
