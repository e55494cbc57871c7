use serde::{Deserialize, Serialize};

use super::{check_n, check_pos};
use crate::capacity::EntropyFn;
use crate::error::{Error, Result};

/// Largest number of chaining levels searched by [`chain_best`].
pub const MAX_LEVELS: u32 = 40;

fn entropy_at(entropy: EntropyFn<'_>, eps: f64) -> Result<f64> {
    let h = entropy(eps);
    if h.is_nan() || h < 0.0 {
        return Err(Error::Numerical(format!("entropy at scale {eps} is {h}")));
    }
    Ok(h)
}

/// Finite chaining bound with `levels` dyadic scales on a class of diameter
/// `diameter`:
/// `D 2^{-N} + 6D Σ_{j=1..N} 2^{-j} √(H(D 2^{-j}) / n)`.
pub fn chain_finite(levels: u32, entropy: EntropyFn<'_>, n: usize, diameter: f64) -> Result<f64> {
    if levels == 0 {
        return Err(Error::param("number of chaining levels must be >= 1"));
    }
    let nf = check_n(n)?;
    check_pos(diameter, "diameter")?;
    let mut sum = 0.0;
    for j in 1..=levels {
        let s = (-(j as f64)).exp2();
        sum += s * (entropy_at(entropy, diameter * s)? / nf).sqrt();
    }
    Ok(diameter * (-(levels as f64)).exp2() + 6.0 * diameter * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainBest {
    pub value: f64,
    pub levels: u32,
}

/// Smallest [`chain_finite`] over `levels ∈ [1, max_levels]`; ties go to
/// fewer levels.
pub fn chain_best(max_levels: u32, entropy: EntropyFn<'_>, n: usize, diameter: f64) -> Result<ChainBest> {
    if max_levels == 0 || max_levels > MAX_LEVELS {
        return Err(Error::param(format!("max levels must lie in [1, {MAX_LEVELS}]")));
    }
    let mut best = ChainBest {
        value: chain_finite(1, entropy, n, diameter)?,
        levels: 1,
    };
    for levels in 2..=max_levels {
        let v = chain_finite(levels, entropy, n, diameter)?;
        if v < best.value {
            best = ChainBest { value: v, levels };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainIntegral {
    /// `12/√n ∫_0^{D/2} √H(ε) dε`, or `+∞` when divergent.
    pub value: f64,
    pub diverges: bool,
}

const REL_TOL: f64 = 1e-10;
const MAX_T: f64 = 700.0;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = f(0.5 * (a + m));
    let rm = f(0.5 * (m + b));
    let left = simpson(a, m, fa, lm, fm);
    let right = simpson(m, b, fm, rm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, lm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, rm, fb, right, tol / 2.0, depth - 1)
}

/// Dudley-type entropy integral `12/√n ∫_0^{D/2} √H(ε) dε`.
///
/// Uses `ε = (D/2) e^{-t}` and adaptive Simpson on unit intervals in `t`
/// until the geometric tail estimate is negligible. Integrands that do not
/// settle before `ε` underflows (e.g. `H ~ ε^{-2}`) are reported as
/// divergent.
pub fn chain_integral(entropy: EntropyFn<'_>, n: usize, diameter: f64) -> Result<ChainIntegral> {
    let nf = check_n(n)?;
    check_pos(diameter, "diameter")?;
    let half = diameter / 2.0;
    let bad = std::cell::Cell::new(false);
    let g = |t: f64| {
        let e = half * (-t).exp();
        let h = entropy(e);
        if h.is_nan() || h < 0.0 {
            bad.set(true);
            return 0.0;
        }
        h.sqrt() * e
    };
    let divergent = ChainIntegral {
        value: f64::INFINITY,
        diverges: true,
    };
    let mut total = 0.0;
    let mut prev = f64::NAN;
    let mut t = 0.0;
    while t < MAX_T {
        let (a, b) = (t, t + 1.0);
        let (fa, fm, fb) = (g(a), g(t + 0.5), g(b));
        let whole = simpson(a, b, fa, fm, fb);
        let tol = REL_TOL * (total + whole.abs()).max(f64::MIN_POSITIVE);
        let chunk = adaptive(&g, a, b, fa, fm, fb, whole, tol, 40);
        if bad.get() {
            return Err(Error::Numerical("entropy returned a negative or NaN value".into()));
        }
        if !chunk.is_finite() {
            return Ok(divergent);
        }
        total += chunk;
        if chunk == 0.0 && t > 0.0 && prev == 0.0 {
            break;
        }
        if prev.is_finite() && prev > 0.0 {
            let r = chunk / prev;
            if r < 1.0 && chunk * r / (1.0 - r) <= REL_TOL * total {
                break;
            }
        }
        prev = chunk;
        t += 1.0;
    }
    if t >= MAX_T {
        return Ok(divergent);
    }
    Ok(ChainIntegral {
        value: 12.0 / nf.sqrt() * total,
        diverges: false,
    })
}
