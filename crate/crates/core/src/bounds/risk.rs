use serde::{Deserialize, Serialize};

use super::apps::{
    rad_bound_pwa, rad_bound_pwa_relaxed, rad_bound_pws_general, rad_bound_pws_kernel,
    rad_bound_switching_fatpoly, rad_bound_switching_kernel, rad_bound_switching_linear_chained,
};
use super::{check_modes, check_n, check_pos, BoundInputs, BoundReport};
use crate::data::LossParams;
use crate::error::{Error, Result};

/// `√(ln(1/δ) / (2n))`.
pub fn confidence_term(delta: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = check_n(n)?;
    Ok(((1.0 / delta).ln() / (2.0 * n)).sqrt())
}

fn check_emp(emp: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&emp) {
        return Err(Error::param(format!("empirical risk must lie in [0, 1], got {emp}")));
    }
    Ok(())
}

fn check_rad(rad: f64) -> Result<()> {
    if !(rad >= 0.0) {
        return Err(Error::param(format!("Rademacher value must be >= 0, got {rad}")));
    }
    Ok(())
}

/// `emp + 2 rad + √(ln(1/δ)/(2n))`, for a loss class with values in `[0, 1]`
/// whose Rademacher complexity is at most `rad`.
pub fn risk_bound_general(emp: f64, rad: f64, delta: f64, n: usize) -> Result<BoundReport> {
    check_emp(emp)?;
    check_rad(rad)?;
    let conf = confidence_term(delta, n)?;
    let inputs = BoundInputs {
        n,
        delta,
        rademacher: Some(rad),
        ..Default::default()
    };
    Ok(BoundReport::assemble("general", emp, 2.0 * rad, conf, inputs))
}

/// ℓp risk bound `emp + 2p rad + √(ln(1/δ)/(2n))`, where `rad` bounds the
/// Rademacher complexity of the (clipped) predictor class.
pub fn risk_bound_lp(emp: f64, rad: f64, p: f64, delta: f64, n: usize) -> Result<BoundReport> {
    LossParams::new(p)?;
    check_emp(emp)?;
    check_rad(rad)?;
    let conf = confidence_term(delta, n)?;
    let inputs = BoundInputs {
        n,
        delta,
        p: Some(p),
        rademacher: Some(rad),
        ..Default::default()
    };
    Ok(BoundReport::assemble("lp", emp, 2.0 * p * rad, conf, inputs))
}

#[allow(clippy::too_many_arguments)]
fn switching_direct(
    id: &str,
    emp: f64,
    p: f64,
    modes: usize,
    r_x: f64,
    radius: f64,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    LossParams::new(p)?;
    check_emp(emp)?;
    let c = check_modes(modes)?;
    check_pos(r_x, "R_x")?;
    check_pos(radius, "class radius")?;
    let conf = confidence_term(delta, n)?;
    let nf = n as f64;
    let control = 2.0 * p * c * r_x * radius / nf.sqrt();
    let inputs = BoundInputs {
        n,
        delta,
        modes: Some(modes),
        p: Some(p),
        ..Default::default()
    };
    Ok(BoundReport::assemble(id, emp, control, conf, inputs))
}

/// Switching ℓp bound for `C` linear components with `‖w‖ ≤ R_w` on inputs
/// with `‖x‖ ≤ R_x`: control term `2pC R_x R_w / √n`.
pub fn risk_bound_switching_linear(
    emp: f64,
    p: f64,
    modes: usize,
    r_x: f64,
    r_w: f64,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    switching_direct("switching-linear", emp, p, modes, r_x, r_w, n, delta)
}

/// Kernel analogue of [`risk_bound_switching_linear`] with RKHS radius `R_H`.
pub fn risk_bound_switching_kernel(
    emp: f64,
    p: f64,
    modes: usize,
    r_x: f64,
    r_h: f64,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    switching_direct("switching-kernel-rad", emp, p, modes, r_x, r_h, n, delta)
}

/// A risk bound with its class parameters fixed; the number of modes, the
/// empirical risk, `n` and `δ` are supplied at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "kebab-case")]
pub enum RiskFormula {
    SwitchingLinear { p: f64, r_x: f64, r_w: f64 },
    SwitchingKernelRad { p: f64, r_x: f64, r_h: f64 },
    SwitchingLinearChained { p: f64, d: usize, r_x: f64, r_w: f64 },
    SwitchingKernel { p: f64, r_x: f64, r_h: f64 },
    SwitchingFatpoly { p: f64, alpha: f64, beta: f64 },
    /// `d` is the classifier dimension.
    PwsGeneral { p: f64, d: usize, alpha: f64, beta: f64 },
    PwsKernel { p: f64, d: usize, r_x: f64, r_h: f64 },
    Pwa { p: f64, d: usize, r_x: f64, r_w: f64 },
    PwaRelaxed { p: f64, d: usize, r_x: f64, r_w: f64 },
    Trivial,
    Empirical,
}

impl RiskFormula {
    pub fn id(&self) -> String {
        let direct = |beta: f64| if beta < 2.0 { "/direct-sum" } else { "" };
        match self {
            RiskFormula::SwitchingLinear { .. } => "switching-linear".into(),
            RiskFormula::SwitchingKernelRad { .. } => "switching-kernel-rad".into(),
            RiskFormula::SwitchingLinearChained { .. } => "switching-linear-chained".into(),
            RiskFormula::SwitchingKernel { .. } => "switching-kernel".into(),
            RiskFormula::SwitchingFatpoly { beta, .. } => format!("switching-fatpoly{}", direct(*beta)),
            RiskFormula::PwsGeneral { beta, .. } => format!("pws-general{}", direct(*beta)),
            RiskFormula::PwsKernel { .. } => "pws-kernel".into(),
            RiskFormula::Pwa { .. } => "pwa".into(),
            RiskFormula::PwaRelaxed { .. } => "pwa-relaxed".into(),
            RiskFormula::Trivial => "trivial".into(),
            RiskFormula::Empirical => "empirical".into(),
        }
    }

    /// Loss exponent the bound is stated for (1 for the two degenerate
    /// formulas).
    pub fn p(&self) -> f64 {
        match *self {
            RiskFormula::SwitchingLinear { p, .. }
            | RiskFormula::SwitchingKernelRad { p, .. }
            | RiskFormula::SwitchingLinearChained { p, .. }
            | RiskFormula::SwitchingKernel { p, .. }
            | RiskFormula::SwitchingFatpoly { p, .. }
            | RiskFormula::PwsGeneral { p, .. }
            | RiskFormula::PwsKernel { p, .. }
            | RiskFormula::Pwa { p, .. }
            | RiskFormula::PwaRelaxed { p, .. } => p,
            RiskFormula::Trivial | RiskFormula::Empirical => 1.0,
        }
    }

    /// Norm radius of the component class (`R_w` or `R_H`), when the
    /// formula has one.
    pub fn component_radius(&self) -> Option<f64> {
        match *self {
            RiskFormula::SwitchingLinear { r_w, .. }
            | RiskFormula::SwitchingLinearChained { r_w, .. }
            | RiskFormula::Pwa { r_w, .. }
            | RiskFormula::PwaRelaxed { r_w, .. } => Some(r_w),
            RiskFormula::SwitchingKernelRad { r_h, .. }
            | RiskFormula::SwitchingKernel { r_h, .. }
            | RiskFormula::PwsKernel { r_h, .. } => Some(r_h),
            _ => None,
        }
    }

    /// Whether the empirical risk to plug in is the switching risk (as
    /// opposed to the PWS risk).
    pub fn is_switching(&self) -> bool {
        matches!(
            self,
            RiskFormula::SwitchingLinear { .. }
                | RiskFormula::SwitchingKernelRad { .. }
                | RiskFormula::SwitchingLinearChained { .. }
                | RiskFormula::SwitchingKernel { .. }
                | RiskFormula::SwitchingFatpoly { .. }
        )
    }

    /// Rademacher value the control term is built from, and the multiplier
    /// turning it into the control term. PWS bounds control the predictor
    /// class (multiplier `2p`); chained switching bounds already control the
    /// loss class (multiplier 2).
    fn rademacher(&self, modes: usize, n: usize) -> Result<Option<(f64, f64)>> {
        Ok(match *self {
            RiskFormula::SwitchingLinearChained { p, d, r_x, r_w } => {
                Some((rad_bound_switching_linear_chained(modes, d, p, r_x, r_w, n)?, 2.0))
            }
            RiskFormula::SwitchingKernel { p, r_x, r_h } => {
                Some((rad_bound_switching_kernel(modes, p, r_x, r_h, n)?, 2.0))
            }
            RiskFormula::SwitchingFatpoly { p, alpha, beta } => {
                Some((rad_bound_switching_fatpoly(modes, p, alpha, beta, n)?, 2.0))
            }
            RiskFormula::PwsGeneral { p, d, alpha, beta } => {
                Some((rad_bound_pws_general(modes, d, alpha, beta, n)?, 2.0 * p))
            }
            RiskFormula::PwsKernel { p, d, r_x, r_h } => {
                Some((rad_bound_pws_kernel(modes, d, r_x, r_h, n)?, 2.0 * p))
            }
            RiskFormula::Pwa { p, d, r_x, r_w } => Some((rad_bound_pwa(modes, d, r_x, r_w, n)?, 2.0 * p)),
            RiskFormula::PwaRelaxed { p, d, r_x, r_w } => {
                Some((rad_bound_pwa_relaxed(modes, d, r_x, r_w, n)?, 2.0 * p))
            }
            _ => None,
        })
    }

    pub fn evaluate(&self, emp: f64, modes: usize, n: usize, delta: f64) -> Result<BoundReport> {
        let mut report = match *self {
            RiskFormula::SwitchingLinear { p, r_x, r_w } => {
                risk_bound_switching_linear(emp, p, modes, r_x, r_w, n, delta)?
            }
            RiskFormula::SwitchingKernelRad { p, r_x, r_h } => {
                risk_bound_switching_kernel(emp, p, modes, r_x, r_h, n, delta)?
            }
            RiskFormula::Trivial | RiskFormula::Empirical => {
                check_emp(emp)?;
                confidence_term(delta, n)?;
                let inputs = BoundInputs {
                    n,
                    delta,
                    modes: Some(modes),
                    ..Default::default()
                };
                let mut r = BoundReport::assemble(self.id(), emp, 0.0, 0.0, inputs);
                if *self == RiskFormula::Trivial {
                    r.raw_total = 1.0;
                    r.clamped_total = 1.0;
                    r.control_term = 1.0 - emp;
                }
                r
            }
            _ => {
                LossParams::new(self.p())?;
                check_emp(emp)?;
                let (rad, mult) = self.rademacher(modes, n)?.expect("chained formula");
                let conf = confidence_term(delta, n)?;
                let inputs = BoundInputs {
                    n,
                    delta,
                    modes: Some(modes),
                    p: Some(self.p()),
                    rademacher: Some(rad),
                    ..Default::default()
                };
                BoundReport::assemble(self.id(), emp, mult * rad, conf, inputs)
            }
        };
        report.inputs.formula = Some(*self);
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_example() {
        let r = risk_bound_general(0.2, 0.05, (-2f64).exp(), 200).unwrap();
        assert!((r.raw_total - 0.370710678118655).abs() < 1e-12);
        assert_eq!(r.formula_id, "general");
        // δ → 1 and rad = 0 leave the empirical risk
        let r = risk_bound_general(0.2, 0.0, 1.0 - 1e-15, 200).unwrap();
        assert!((r.raw_total - 0.2).abs() < 1e-7);
        for d in [0.0, 1.0, -0.1, 2.0] {
            assert!(matches!(risk_bound_general(0.2, 0.0, d, 10), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn lp_example() {
        let r = risk_bound_lp(0.1, 0.02, 2.0, 0.05, 100).unwrap();
        assert!((r.raw_total - 0.302387341534041).abs() < 1e-12);
        let a = risk_bound_lp(0.1, 0.02, 1.0, 0.05, 100).unwrap();
        let b = risk_bound_general(0.1, 0.02, 0.05, 100).unwrap();
        assert_eq!(a.raw_total, b.raw_total);
    }

    #[test]
    fn confidence_sqrt_law() {
        let a = confidence_term(0.1, 50).unwrap();
        let b = confidence_term(0.01, 50).unwrap();
        assert!((b / a - 2f64.sqrt()).abs() < 1e-12);
        assert!(confidence_term(0.1, 100).unwrap() < a);
        assert!(confidence_term(0.05, 50).unwrap() > a);
    }

    #[test]
    fn switching_linear_example() {
        let r = risk_bound_switching_linear(0.1, 1.0, 2, 1.0, 1.0, 400, (-2f64).exp()).unwrap();
        assert!((r.raw_total - 0.35).abs() < 1e-12);
        assert!((r.control_term - 0.2).abs() < 1e-15);
        let r4 = risk_bound_switching_linear(0.1, 1.0, 4, 1.0, 1.0, 400, (-2f64).exp()).unwrap();
        assert!((r4.control_term / r.control_term - 2.0).abs() < 1e-12);
        assert!(risk_bound_switching_linear(0.1, 0.0, 2, 1.0, 1.0, 400, 0.1).is_err());
        let one = risk_bound_switching_linear(0.1, 1.0, 1, 1.0, 1.0, 400, 0.1).unwrap();
        let lp = risk_bound_lp(0.1, 1.0 / 20.0, 1.0, 0.1, 400).unwrap();
        assert!((one.raw_total - lp.raw_total).abs() < 1e-15);
        let k = risk_bound_switching_kernel(0.1, 1.0, 2, 1.0, 1.0, 400, (-2f64).exp()).unwrap();
        assert_eq!(k.raw_total, r.raw_total);
        assert_eq!(k.formula_id, "switching-kernel-rad");
    }

    #[test]
    fn formula_composition() {
        let f = RiskFormula::SwitchingLinearChained { p: 1.0, d: 1, r_x: 1.0, r_w: 1.0 };
        let r = f.evaluate(0.0, 1, 144, 0.5).unwrap();
        assert!((r.control_term - 2.0 * 3f64.ln().sqrt()).abs() < 1e-12);
        let f = RiskFormula::PwsKernel { p: 2.0, d: 1, r_x: 0.1, r_h: 0.1 };
        let r = f.evaluate(0.0, 1, 1_000_000, 0.5).unwrap();
        assert!((r.control_term - 4.0 * 3.14657223862178).abs() < 1e-9);
        assert_eq!(r.clamped_total, 1.0);
        let t = RiskFormula::Trivial.evaluate(0.3, 2, 10, 0.1).unwrap();
        assert_eq!((t.raw_total, t.clamped_total), (1.0, 1.0));
        let e = RiskFormula::Empirical.evaluate(0.3, 2, 10, 0.1).unwrap();
        assert_eq!(e.raw_total, 0.3);
        assert_eq!(RiskFormula::PwsGeneral { p: 1.0, d: 1, alpha: 1.0, beta: 1.5 }.id(), "pws-general/direct-sum");
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"formula\":\"pws-kernel\""));
        assert_eq!(serde_json::from_str::<RiskFormula>(&s).unwrap(), f);
    }
}
