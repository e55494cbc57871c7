use super::floor_dim;
use crate::error::{Error, Result};

/// `floor((R_x R_w / ε)²)`, the fat-shattering bound of a linear (or RKHS) ball.
pub fn fat_shattering_linear(r_x: f64, r_w: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("scale must be positive, got {eps}")));
    }
    Ok(floor_dim((r_x * r_w / eps).powi(2)))
}

/// `C d ln(3n)`: log growth-function bound for argmax-of-linear classifiers.
pub fn growth_linear_classifiers(modes: usize, d: usize, n: usize) -> Result<f64> {
    if modes < 2 || d < 2 || n < 1 {
        return Err(Error::param(format!(
            "growth bound needs C >= 2, d >= 2, n >= 1 (got C={modes}, d={d}, n={n})"
        )));
    }
    Ok((modes * d) as f64 * (3.0 * n as f64).ln())
}

/// `d_G ln(n e C / (2 d_G))`: Sauer–Shelah bound for Natarajan dimension `d_G`.
pub fn growth_natarajan(n: usize, modes: usize, d_g: usize) -> Result<f64> {
    if d_g < 1 {
        return Err(Error::param("Natarajan dimension must be >= 1"));
    }
    let dg = d_g as f64;
    Ok(dg * (n as f64 * std::f64::consts::E * modes as f64 / (2.0 * dg)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fat_linear_examples() {
        assert_eq!(fat_shattering_linear(1.0, 1.0, 0.25).unwrap(), 16);
        assert_eq!(fat_shattering_linear(1.0, 1.0, 1.0).unwrap(), 1);
        assert_eq!(fat_shattering_linear(1.0, 1.0, 1.5).unwrap(), 0);
        assert!(fat_shattering_linear(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn growth_examples() {
        // 6 ln 30 and 4 ln 300, from an arbitrary-precision calculator
        let a = growth_linear_classifiers(3, 2, 10).unwrap();
        assert!((a - 20.407_184_289_972_93).abs() < 1e-12);
        let b = growth_linear_classifiers(2, 2, 100).unwrap();
        assert!((b - 22.815_129_898_624_8).abs() < 1e-12);
        assert!(growth_linear_classifiers(1, 2, 10).is_err());
        assert!(growth_linear_classifiers(3, 2, 11).unwrap() > a);
        assert!(growth_linear_classifiers(4, 2, 10).unwrap() > a);
        assert!(growth_linear_classifiers(3, 3, 10).unwrap() > a);
    }

    #[test]
    fn natarajan_examples() {
        assert!((growth_natarajan(1, 2, 1).unwrap() - 1.0).abs() < 1e-15);
        let v = growth_natarajan(1, 2, 2).unwrap();
        assert!((v - 0.613_705_638_880_109_4).abs() < 1e-14);
        assert!(growth_natarajan(2, 2, 0).is_err());
    }
}
