use serde::{Deserialize, Serialize};

use super::{fit_for, model_risk, ModelKind};
use crate::bounds::RiskFormula;
use crate::data::{Dataset, LossParams};
use crate::error::{Error, Result};
use crate::learn::FitOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrmRow {
    pub modes: usize,
    pub empirical_risk: f64,
    pub control_term: f64,
    pub confidence_term: f64,
    pub raw_total: f64,
    pub clamped_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrmReport {
    pub best_modes: usize,
    pub formula_id: String,
    pub model: ModelKind,
    pub delta: f64,
    pub n: usize,
    pub table: Vec<SrmRow>,
}

impl SrmReport {
    /// `C`, empirical risk and bound per row, tab separated.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("C\tempirical_risk\tcontrol_term\tbound\n");
        for r in &self.table {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", r.modes, r.empirical_risk, r.control_term, r.clamped_total));
        }
        out
    }
}

/// Index of the smallest value; ties go to the first.
pub fn argmin_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Structural risk minimization over the number of modes: fits every
/// `C ∈ [1, c_max]` and picks the smallest clamped bound (ties to the
/// smaller `C`).
pub fn select_modes_srm(
    data: &Dataset,
    c_max: usize,
    formula: &RiskFormula,
    delta: f64,
    kind: ModelKind,
    opts: &FitOptions,
) -> Result<SrmReport> {
    if c_max == 0 {
        return Err(Error::param("C_max must be >= 1"));
    }
    let loss = LossParams::new(formula.p())?;
    let mut table = Vec::with_capacity(c_max);
    for modes in 1..=c_max {
        let fit = fit_for(kind, formula, data, modes, opts)?;
        let emp = model_risk(&fit.model, data, loss)?;
        let b = formula.evaluate(emp, modes, data.len(), delta)?;
        table.push(SrmRow {
            modes,
            empirical_risk: emp,
            control_term: b.control_term,
            confidence_term: b.confidence_term,
            raw_total: b.raw_total,
            clamped_total: b.clamped_total,
        });
    }
    let totals: Vec<f64> = table.iter().map(|r| r.clamped_total).collect();
    let best = argmin_first(&totals).expect("c_max >= 1");
    Ok(SrmReport {
        best_modes: table[best].modes,
        formula_id: formula.id(),
        model: kind,
        delta,
        n: data.len(),
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{generate_synthetic, SyntheticKind, SyntheticSpec};

    #[test]
    fn argmin_rules() {
        assert_eq!(argmin_first(&[0.5, 0.3, 0.35]), Some(1));
        assert_eq!(argmin_first(&[1.0, 1.0]), Some(0));
        assert_eq!(argmin_first(&[]), None);
    }

    #[test]
    fn single_candidate() {
        let spec = SyntheticSpec {
            kind: SyntheticKind::ArbitrarySwitching,
            weights: vec![vec![0.2]],
            classifier: None,
            noise: 0.05,
            n: 50,
            r_x: 1.0,
            seed: 1,
        };
        let data = generate_synthetic(&spec).unwrap().data;
        let f = RiskFormula::SwitchingLinear { p: 2.0, r_x: 1.0, r_w: 0.5 };
        let r = select_modes_srm(&data, 1, &f, 0.05, ModelKind::Switching, &FitOptions::default()).unwrap();
        assert_eq!(r.best_modes, 1);
        assert_eq!(r.table.len(), 1);
    }

    #[test]
    fn recovers_two_modes() {
        // control term ≈ 0.067 C, empirical risk 0.085 at C = 1 and ≈ 0.0033 at C = 2
        let f = RiskFormula::SwitchingLinear { p: 2.0, r_x: 1.0, r_w: 0.75 };
        let hits = (0..10)
            .filter(|&seed| {
                let spec = SyntheticSpec {
                    kind: SyntheticKind::ArbitrarySwitching,
                    weights: vec![vec![0.7, 0.0], vec![-0.7, 0.0]],
                    classifier: None,
                    noise: 0.1,
                    n: 2000,
                    r_x: 1.0,
                    seed,
                };
                let data = generate_synthetic(&spec).unwrap().data;
                let opts = FitOptions::default().with_seed(seed);
                select_modes_srm(&data, 3, &f, 0.05, ModelKind::Switching, &opts).unwrap().best_modes == 2
            })
            .count();
        assert!(hits >= 8, "{hits}/10");
    }

    #[test]
    fn control_terms_grow_with_modes() {
        let spec = SyntheticSpec {
            kind: SyntheticKind::ArbitrarySwitching,
            weights: vec![vec![0.5, 0.0], vec![-0.5, 0.0]],
            classifier: None,
            noise: 0.05,
            n: 200,
            r_x: 1.0,
            seed: 2,
        };
        let data = generate_synthetic(&spec).unwrap().data;
        for f in [
            RiskFormula::SwitchingLinear { p: 2.0, r_x: 1.0, r_w: 0.6 },
            RiskFormula::SwitchingLinearChained { p: 2.0, d: 2, r_x: 1.0, r_w: 0.6 },
        ] {
            let r = select_modes_srm(&data, 4, &f, 0.05, ModelKind::Switching, &FitOptions::default()).unwrap();
            assert!(r.table.windows(2).all(|w| w[0].control_term <= w[1].control_term));
            assert!(r.to_tsv().lines().count() == 5);
        }
    }
}
