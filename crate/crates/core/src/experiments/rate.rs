use serde::{Deserialize, Serialize};

use crate::bounds::RiskFormula;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Least-squares slope of `ln value` against `ln n`.
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual of the fit.
    pub residual: f64,
    pub points: Vec<(usize, f64)>,
}

impl RateReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("ln_n\tln_value\n");
        for &(n, v) in &self.points {
            out.push_str(&format!("{}\t{}\n", (n as f64).ln(), v.ln()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub formula: RiskFormula,
    pub modes: usize,
    pub n_grid: Vec<usize>,
}

/// Fits `ln value(n) ≈ slope · ln n + intercept` over `ns`. The grid needs
/// at least 4 points spanning at least 3 decades, and every value must be
/// positive.
pub fn rate_study(ns: &[usize], value: impl Fn(usize) -> Result<f64>) -> Result<RateReport> {
    let lo = ns.iter().copied().min().unwrap_or(0);
    let hi = ns.iter().copied().max().unwrap_or(0);
    if ns.len() < 4 || lo == 0 || (hi as f64) < 1000.0 * lo as f64 {
        return Err(Error::input("rate grid needs >= 4 points spanning >= 3 decades"));
    }
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let v = value(n)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::input(format!("value at n = {n} is {v}, not positive")));
        }
        points.push((n, v));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::input("rate grid has a single distinct n"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(RateReport {
        slope,
        intercept,
        residual,
        points,
    })
}

/// Rate of the control term of a risk formula.
pub fn rate_study_formula(cfg: &RateConfig) -> Result<RateReport> {
    rate_study(&cfg.n_grid, |n| Ok(cfg.formula.evaluate(0.0, cfg.modes, n, 0.5)?.control_term))
}
