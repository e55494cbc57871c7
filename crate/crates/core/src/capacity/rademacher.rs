use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ComponentClassSpec, FiniteClass};
use crate::error::{Error, Result};
use crate::models::Kernel;
use crate::rng;

/// Largest sample size accepted by the exhaustive sign enumerations.
pub const MAX_EXACT_RADEMACHER: usize = 20;

const MC_BLOCK: usize = 512;

/// Monte Carlo estimate of an empirical Rademacher complexity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub draws: usize,
    pub seed: u64,
}

/// Closed-form supremum over a norm ball for one sign vector.
enum BallSup<'a> {
    /// `(r/n) ‖Σ σ_i x_i‖₂`
    Linear { xs: &'a [Vec<f64>], radius: f64 },
    /// `(r/n) sqrt(σᵀ K σ)`
    Gram { gram: nalgebra::DMatrix<f64>, radius: f64 },
}

impl BallSup<'_> {
    fn n(&self) -> usize {
        match self {
            BallSup::Linear { xs, .. } => xs.len(),
            BallSup::Gram { gram, .. } => gram.nrows(),
        }
    }

    fn eval(&self, signs: &[f64]) -> f64 {
        let n = signs.len() as f64;
        match self {
            BallSup::Linear { xs, radius } => {
                let d = xs[0].len();
                let mut acc = vec![0.0; d];
                for (x, s) in xs.iter().zip(signs) {
                    for (a, v) in acc.iter_mut().zip(x) {
                        *a += s * v;
                    }
                }
                radius / n * acc.iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            BallSup::Gram { gram, radius } => {
                let m = gram.nrows();
                let mut q = 0.0;
                for i in 0..m {
                    let mut row = 0.0;
                    for j in 0..m {
                        row += gram[(i, j)] * signs[j];
                    }
                    q += signs[i] * row;
                }
                radius / n * q.max(0.0).sqrt()
            }
        }
    }
}

fn ball_sup<'a>(spec: &ComponentClassSpec, xs: &'a [Vec<f64>]) -> Result<BallSup<'a>> {
    if xs.is_empty() {
        return Err(Error::input("sample must contain at least one point"));
    }
    let d = xs[0].len();
    if xs.iter().any(|x| x.len() != d) {
        return Err(Error::input("sample points differ in dimension"));
    }
    match *spec {
        ComponentClassSpec::Linear { d: sd, r_w, .. } => {
            if sd != d {
                return Err(Error::input(format!(
                    "class dimension {sd} does not match sample dimension {d}"
                )));
            }
            if !(r_w >= 0.0) {
                return Err(Error::param("R_w must be nonnegative"));
            }
            Ok(BallSup::Linear { xs, radius: r_w })
        }
        ComponentClassSpec::Kernel { kernel, r_h, .. } => {
            kernel.validate()?;
            if !(r_h >= 0.0) {
                return Err(Error::param("R_H must be nonnegative"));
            }
            Ok(BallSup::Gram {
                gram: Kernel::gram(&kernel, xs),
                radius: r_h,
            })
        }
        ComponentClassSpec::FatPoly { .. } => Err(Error::param(
            "Monte Carlo estimation needs a linear or kernel class",
        )),
    }
}

/// Monte Carlo estimate of the empirical Rademacher complexity of a linear
/// or kernel ball on the sample `xs`.
///
/// Each draw evaluates the supremum in closed form (Cauchy–Schwarz). Draws
/// are generated in fixed-size blocks, each from its own seeded stream, and
/// summed in block order, so the result does not depend on thread count.
pub fn rademacher_mc(
    spec: &ComponentClassSpec,
    xs: &[Vec<f64>],
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    if draws == 0 {
        return Err(Error::param("draws must be >= 1"));
    }
    let sup = ball_sup(spec, xs)?;
    let n = sup.n();
    let blocks = draws.div_ceil(MC_BLOCK);
    let values: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(seed, &[b as u64]);
            let count = MC_BLOCK.min(draws - b * MC_BLOCK);
            let mut signs = vec![0.0; n];
            (0..count)
                .map(|_| {
                    for s in signs.iter_mut() {
                        *s = if r.random::<bool>() { 1.0 } else { -1.0 };
                    }
                    sup.eval(&signs)
                })
                .collect()
        })
        .collect();
    let all = values.concat();
    let m = all.len() as f64;
    let mean = all.iter().sum::<f64>() / m;
    let var = if all.len() > 1 {
        all.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr: (var / m).sqrt(),
        draws,
        seed,
    })
}

fn signs_of(mask: u32, n: usize, out: &mut [f64]) {
    for (i, s) in out.iter_mut().enumerate().take(n) {
        *s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
    }
}

/// Exact empirical Rademacher complexity of a linear or kernel ball:
/// the closed-form supremum averaged over all `2^n` sign vectors.
pub fn rademacher_enumerate(spec: &ComponentClassSpec, xs: &[Vec<f64>]) -> Result<f64> {
    let sup = ball_sup(spec, xs)?;
    let n = sup.n();
    if n > MAX_EXACT_RADEMACHER {
        return Err(Error::ResourceLimit(format!(
            "sign enumeration needs n <= {MAX_EXACT_RADEMACHER}, got {n}"
        )));
    }
    let mut signs = vec![0.0; n];
    let mut total = 0.0;
    for mask in 0..(1u32 << n) {
        signs_of(mask, n, &mut signs);
        total += sup.eval(&signs);
    }
    Ok(total / (1u64 << n) as f64)
}

/// `(1/2^n) Σ_σ max_f (1/n) Σ_i σ_i f_i`, by enumeration of all sign vectors.
pub fn rademacher_exact(fc: &FiniteClass) -> Result<f64> {
    let n = fc.sample_len();
    if n > MAX_EXACT_RADEMACHER {
        return Err(Error::ResourceLimit(format!(
            "exact Rademacher complexity needs n <= {MAX_EXACT_RADEMACHER}, got {n}"
        )));
    }
    let mut signs = vec![0.0; n];
    let mut total = 0.0;
    for mask in 0..(1u32 << n) {
        signs_of(mask, n, &mut signs);
        let best = fc
            .rows()
            .iter()
            .map(|f| f.iter().zip(&signs).map(|(a, s)| a * s).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        total += best / n as f64;
    }
    Ok(total / (1u64 << n) as f64)
}

/// `R_x R_w / sqrt(n)`; for an RKHS ball pass `R_H` as `r_w` and
/// `sup sqrt(K(x, x))` as `r_x`.
pub fn rademacher_linear_bound(r_x: f64, r_w: f64, n: usize) -> Result<f64> {
    if !(r_x >= 0.0 && r_w >= 0.0 && r_x.is_finite() && r_w.is_finite()) {
        return Err(Error::param("radii must be nonnegative and finite"));
    }
    if n == 0 {
        return Err(Error::param("n must be >= 1"));
    }
    Ok(r_x * r_w / (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(r_w: f64) -> ComponentClassSpec {
        ComponentClassSpec::Linear {
            d: 2,
            r_x: 1.0,
            r_w,
        }
    }

    #[test]
    fn orthonormal_pair_gives_constant_supremum() {
        let xs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let expected = 2f64.sqrt() / 2.0;
        for draws in [1, 7, 1000] {
            let est = rademacher_mc(&lin(1.0), &xs, draws, 3).unwrap();
            assert!((est.mean - expected).abs() < 1e-12);
        }
        assert!((rademacher_enumerate(&lin(1.0), &xs).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_radius_class() {
        let xs = vec![vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 0.0]];
        assert_eq!(rademacher_mc(&lin(0.0), &xs, 50, 1).unwrap().mean, 0.0);
    }

    #[test]
    fn mc_rejects_zero_draws() {
        let xs = vec![vec![1.0, 0.0]];
        assert!(matches!(
            rademacher_mc(&lin(1.0), &xs, 0, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn mc_is_seed_deterministic_and_thread_independent() {
        let xs: Vec<Vec<f64>> = (0..9).map(|i| vec![(i as f64).sin(), (i as f64).cos()]).collect();
        let a = rademacher_mc(&lin(1.0), &xs, 3000, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| rademacher_mc(&lin(1.0), &xs, 3000, 42).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn mc_below_linear_bound() {
        let xs: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64 * 0.37;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let est = rademacher_mc(&lin(1.0), &xs, 4000, 9).unwrap();
        let bound = rademacher_linear_bound(1.0, 1.0, xs.len()).unwrap();
        assert!(est.mean <= bound + 3.0 * est.stderr);
    }

    #[test]
    fn exact_examples() {
        let zero = FiniteClass::new(vec![vec![0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(rademacher_exact(&zero).unwrap(), 0.0);
        let pair = FiniteClass::new(vec![vec![0.5, 0.5], vec![-0.5, -0.5]]).unwrap();
        assert!((rademacher_exact(&pair).unwrap() - 0.25).abs() < 1e-15);
        let sym = FiniteClass::new(vec![vec![0.5], vec![-0.5]]).unwrap();
        assert_eq!(rademacher_exact(&sym).unwrap(), 0.5);
        let big = FiniteClass::new(vec![vec![0.0; 21]]).unwrap();
        assert!(matches!(rademacher_exact(&big), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn linear_bound_examples() {
        assert_eq!(rademacher_linear_bound(2.0, 0.5, 16).unwrap(), 0.25);
        assert_eq!(rademacher_linear_bound(1.0, 1.0, 100).unwrap(), 0.1);
        let a = rademacher_linear_bound(1.3, 0.7, 50).unwrap();
        let b = rademacher_linear_bound(1.3, 0.7, 200).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_supremum_matches_sphere_grid() {
        // brute-force sup over w on a fine grid of the unit circle
        let xs = vec![vec![0.3, -0.8], vec![0.9, 0.1], vec![-0.4, 0.4], vec![0.2, 0.7]];
        let grid: Vec<Vec<f64>> = (0..20000)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 20000.0;
                xs.iter().map(|x| t.cos() * x[0] + t.sin() * x[1]).collect()
            })
            .collect();
        let fc = FiniteClass::new(grid).unwrap();
        let exact = rademacher_enumerate(&lin(1.0), &xs).unwrap();
        let brute = rademacher_exact(&fc).unwrap();
        assert!((exact - brute).abs() < 1e-3, "{exact} vs {brute}");
        assert!(brute <= exact + 1e-12);
    }

    #[test]
    fn kernel_mc_with_linear_kernel_matches_linear() {
        let xs = vec![vec![0.3, -0.8], vec![0.9, 0.1], vec![-0.4, 0.4]];
        let k = ComponentClassSpec::Kernel {
            kernel: Kernel::linear(),
            r_x: 1.0,
            r_h: 1.0,
        };
        let a = rademacher_enumerate(&k, &xs).unwrap();
        let b = rademacher_enumerate(&lin(1.0), &xs).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
