//! Metric entropy bounds `ln N(ε)` for component and PWS classes.
//!
//! Every evaluator returns a nonnegative value: covering numbers are at least 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_scale(eps: f64, half_range: f64) -> Result<()> {
    if !(half_range > 0.0) {
        return Err(Error::param("half-range M must be positive"));
    }
    if !(eps > 0.0 && eps <= 2.0 * half_range) {
        return Err(Error::param(format!(
            "scale must lie in (0, 2M] = (0, {}], got {eps}",
            2.0 * half_range
        )));
    }
    Ok(())
}

/// L∞ entropy from the fat-shattering dimension `d = fat_at(ε/4)`:
/// `ln 2 + d log₂(4Men/(dε)) ln(16M²n/ε²)`; zero when `d = 0`.
///
/// The exponent keeps its base-2 logarithm; the outer logarithm is natural.
pub fn entropy_inf_fat(
    eps: f64,
    n: usize,
    fat_at: impl Fn(f64) -> u64,
    half_range: f64,
) -> Result<f64> {
    check_scale(eps, half_range)?;
    if n == 0 {
        return Err(Error::param("n must be >= 1"));
    }
    let d = fat_at(eps / 4.0);
    if d == 0 {
        return Ok(0.0);
    }
    let (m, n, d) = (half_range, n as f64, d as f64);
    let exponent = d * (4.0 * m * std::f64::consts::E * n / (d * eps)).log2();
    let v = std::f64::consts::LN_2 + exponent * (16.0 * m * m * n / (eps * eps)).ln();
    Ok(v.max(0.0))
}

/// Dimension-free L2 entropy `20 fat_at(ε/96) ln(13M/ε)`.
pub fn entropy_l2_dimfree(eps: f64, fat_at: impl Fn(f64) -> u64, half_range: f64) -> Result<f64> {
    check_scale(eps, half_range)?;
    let d = fat_at(eps / 96.0) as f64;
    Ok(20.0 * d * (13.0 * half_range / eps).ln())
}

/// L∞ entropy of a `d`-dimensional linear ball, `d ln((2 + R_w) R_x / ε)`
/// for `ε ≤ R_x R_w`, zero above.
pub fn entropy_inf_linear_finite_d(eps: f64, d: usize, r_x: f64, r_w: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("scale must be positive, got {eps}")));
    }
    if eps > r_x * r_w {
        return Ok(0.0);
    }
    Ok(d as f64 * ((2.0 + r_w) * r_x / eps).ln())
}

/// L∞ entropy of an RKHS ball, `36 (R_x R_H / ε)² ln(15 R_x R_H n / ε)` for
/// `ε < R_x R_H`, zero otherwise.
pub fn entropy_inf_kernel(eps: f64, r_x: f64, r_h: f64, n: usize) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("scale must be positive, got {eps}")));
    }
    if n == 0 {
        return Err(Error::param("n must be >= 1"));
    }
    let r = r_x * r_h;
    if eps >= r {
        return Ok(0.0);
    }
    Ok(36.0 * (r / eps).powi(2) * (15.0 * r * n as f64 / eps).ln())
}

/// Which component-entropy route a PWS entropy bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PwsEntropyVariant {
    /// L∞ product decomposition with the fat-shattering L∞ entropy:
    /// `6 C d_F(ε/4) ln²(2en/ε)`.
    Linf,
    /// Uniform L2 decomposition with the dimension-free entropy:
    /// `20 C d_F(ε/96) ln(7/ε)`.
    L2,
}

/// L2 metric entropy bound of a PWS class at scale `ε ∈ (0, 1]`.
///
/// `classifier_entropy` is the log growth-function term, e.g. from
/// [`super::growth_natarajan`] or [`super::growth_linear_classifiers`].
pub fn entropy_pws(
    eps: f64,
    n: usize,
    modes: usize,
    classifier_entropy: f64,
    fat_at: impl Fn(f64) -> u64,
    variant: PwsEntropyVariant,
) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param(format!("scale must lie in (0, 1], got {eps}")));
    }
    if n == 0 || modes == 0 {
        return Err(Error::param("n and C must be >= 1"));
    }
    let c = modes as f64;
    let component = match variant {
        PwsEntropyVariant::Linf => {
            let l = (2.0 * std::f64::consts::E * n as f64 / eps).ln();
            6.0 * c * fat_at(eps / 4.0) as f64 * l * l
        }
        PwsEntropyVariant::L2 => 20.0 * c * fat_at(eps / 96.0) as f64 * (7.0 / eps).ln(),
    };
    Ok(classifier_entropy + component)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::growth_natarajan;
    use proptest::prelude::*;

    // Expected values below were computed independently with mpmath (30 digits).

    #[test]
    fn inf_fat_examples() {
        let v = entropy_inf_fat(1.0, 4, |_| 1, 0.5).unwrap();
        assert!((v - 13.010_913_347_279_29).abs() < 1e-12);
        assert_eq!(entropy_inf_fat(0.3, 50, |_| 0, 0.5).unwrap(), 0.0);
        assert!(entropy_inf_fat(0.5, 40, |_| 2, 0.5).unwrap() > entropy_inf_fat(0.5, 20, |_| 2, 0.5).unwrap());
        assert!(entropy_inf_fat(1.01, 4, |_| 1, 0.5).is_err());
        assert!(entropy_inf_fat(0.0, 4, |_| 1, 0.5).is_err());
    }

    #[test]
    fn l2_dimfree_examples() {
        let v = entropy_l2_dimfree(1.0, |_| 2, 0.5).unwrap();
        assert!((v - 74.872_087_076_063_66).abs() < 1e-11);
        assert_eq!(entropy_l2_dimfree(0.7, |_| 0, 0.5).unwrap(), 0.0);
        let a = entropy_l2_dimfree(0.5, |_| 3, 0.5).unwrap();
        let b = entropy_l2_dimfree(0.25, |_| 3, 0.5).unwrap();
        assert!((b - a - 60.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!(entropy_l2_dimfree(2.0, |_| 1, 0.5).is_err());
    }

    #[test]
    fn linear_finite_d_examples() {
        let v = entropy_inf_linear_finite_d(0.5, 2, 1.0, 1.0).unwrap();
        assert!((v - 3.583_518_938_456_11).abs() < 1e-14);
        assert_eq!(entropy_inf_linear_finite_d(1.01, 2, 1.0, 1.0).unwrap(), 0.0);
        let v3 = entropy_inf_linear_finite_d(0.5, 6, 1.0, 1.0).unwrap();
        assert!((v3 - 3.0 * v).abs() < 1e-13);
        assert!(entropy_inf_linear_finite_d(0.0, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_examples() {
        let v = entropy_inf_kernel(0.5, 1.0, 1.0, 10).unwrap();
        assert!((v - 821.344_676_350_493).abs() < 1e-10);
        assert_eq!(entropy_inf_kernel(1.0, 1.0, 1.0, 10).unwrap(), 0.0);
        let a = entropy_inf_kernel(0.5, 1.0, 1.0, 100).unwrap();
        let b = entropy_inf_kernel(0.5, 1.0, 1.0, 1000).unwrap();
        assert!((b - a - 144.0 * 10f64.ln()).abs() < 1e-10);
        assert!(entropy_inf_kernel(-0.1, 1.0, 1.0, 10).is_err());
    }

    #[test]
    fn pws_examples() {
        let dg = growth_natarajan(1, 1, 1).unwrap();
        let p1 = entropy_pws(1.0, 1, 1, dg, |_| 1, PwsEntropyVariant::Linf).unwrap();
        assert!((p1 - 17.507_337_069_668_61).abs() < 1e-12);
        let p2 = entropy_pws(1.0, 1, 1, dg, |_| 1, PwsEntropyVariant::L2).unwrap();
        assert!((p2 - 39.225_055_800_546_32).abs() < 1e-12);
        assert_eq!(entropy_pws(0.5, 10, 3, 4.25, |_| 0, PwsEntropyVariant::Linf).unwrap(), 4.25);
        assert!(entropy_pws(1.5, 1, 1, dg, |_| 1, PwsEntropyVariant::L2).is_err());
    }

    proptest! {
        #[test]
        fn entropies_nonincreasing_in_scale_nondecreasing_in_n(
            e1 in 0.01f64..1.0, e2 in 0.01f64..1.0, n1 in 1usize..10_000, dn in 0usize..10_000,
        ) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let n2 = n1 + dn;
            let fat = |e: f64| crate::capacity::floor_dim(0.01 / (e * e));
            prop_assert!(entropy_l2_dimfree(hi, fat, 0.5).unwrap() <= entropy_l2_dimfree(lo, fat, 0.5).unwrap());
            prop_assert!(entropy_inf_linear_finite_d(hi, 3, 1.0, 0.8).unwrap() <= entropy_inf_linear_finite_d(lo, 3, 1.0, 0.8).unwrap());
            prop_assert!(entropy_inf_kernel(hi, 1.0, 0.7, n1).unwrap() <= entropy_inf_kernel(lo, 1.0, 0.7, n1).unwrap());
            prop_assert!(entropy_inf_kernel(lo, 1.0, 0.7, n1).unwrap() <= entropy_inf_kernel(lo, 1.0, 0.7, n2).unwrap());
            let c = |e: f64| 1 + crate::capacity::floor_dim(0.001 / e);
            prop_assert!(entropy_inf_fat(hi, n1, c, 0.5).unwrap() <= entropy_inf_fat(lo, n1, c, 0.5).unwrap() + 1e-9);
            prop_assert!(entropy_inf_fat(lo, n1, c, 0.5).unwrap() <= entropy_inf_fat(lo, n2, c, 0.5).unwrap() + 1e-9);
            for v in [PwsEntropyVariant::Linf, PwsEntropyVariant::L2] {
                prop_assert!(entropy_pws(hi, n1, 2, 1.0, c, v).unwrap() <= entropy_pws(lo, n1, 2, 1.0, c, v).unwrap());
                prop_assert!(entropy_pws(lo, n1, 2, 1.0, c, v).unwrap() <= entropy_pws(lo, n2, 2, 1.0, c, v).unwrap());
            }
        }
    }
}
