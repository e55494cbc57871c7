//! Covering-number decompositions of composite classes, plus constructors
//! for finite composite families used to check them.

use serde::{Deserialize, Serialize};

use super::{EntropyFn, FiniteClass};
use crate::data::{LossParams, Norm};
use crate::error::{Error, Result};

/// How a PWS class cover is assembled from component covers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "kebab-case")]
pub enum PwsDecomposition {
    /// Product of component nets for every classification of the sample;
    /// under `d_q` component scales shrink by `C^{1/q}`.
    ProductNet { q: Norm },
    /// Product of uniform L2 component covers at the unscaled ε, for
    /// uniform Glivenko–Cantelli component classes.
    UniformL2,
}

fn check_eps(eps: f64, components: usize) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("scale must be positive, got {eps}")));
    }
    if components == 0 {
        return Err(Error::param("at least one component class is required"));
    }
    Ok(())
}

/// `log_growth + Σ_k ln N_k(ε')` with `ε' = ε / C^{1/q}` (product net) or
/// `ε' = ε` (uniform L2).
pub fn entropy_decompose_pws(
    eps: f64,
    route: PwsDecomposition,
    log_growth: f64,
    components: &[EntropyFn<'_>],
) -> Result<f64> {
    check_eps(eps, components.len())?;
    let scale = match route {
        PwsDecomposition::ProductNet { q } => {
            q.validate()?;
            eps / q.mode_factor(components.len())
        }
        PwsDecomposition::UniformL2 => eps,
    };
    Ok(log_growth + components.iter().map(|h| h(scale)).sum::<f64>())
}

/// `Σ_k ln N_k(ε / (p C^{1/q}))`: entropy of the switching ℓp loss class.
pub fn entropy_decompose_switching(
    eps: f64,
    q: Norm,
    p: f64,
    components: &[EntropyFn<'_>],
) -> Result<f64> {
    check_eps(eps, components.len())?;
    q.validate()?;
    LossParams::new(p)?;
    let scale = eps / (p * q.mode_factor(components.len()));
    Ok(components.iter().map(|h| h(scale)).sum())
}

/// Number of distinct classifications (the trace size `|G_{x_n}|`).
pub fn trace_size(classifications: &[Vec<usize>]) -> usize {
    let mut seen: Vec<&Vec<usize>> = Vec::new();
    for c in classifications {
        if !seen.contains(&c) {
            seen.push(c);
        }
    }
    seen.len()
}

fn check_components(components: &[FiniteClass]) -> Result<usize> {
    let first = components
        .first()
        .ok_or_else(|| Error::input("at least one component class is required"))?;
    let n = first.sample_len();
    if components.iter().any(|c| c.sample_len() != n) {
        return Err(Error::input("component classes differ in sample length"));
    }
    Ok(n)
}

/// Calls `f` with every tuple `(f_1, ..., f_C)` of row indices, last
/// component varying fastest.
fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0; sizes.len()];
    loop {
        f(&idx);
        let mut k = sizes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn distinct(classifications: &[Vec<usize>]) -> Vec<&Vec<usize>> {
    let mut out: Vec<&Vec<usize>> = Vec::new();
    for c in classifications {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Finite PWS family `{x_i ↦ f_{c_i}(x_i)}` over every distinct
/// classification `c` and every tuple of component functions.
///
/// Rows are ordered by classification (in order of first appearance), then
/// by tuple with the last component varying fastest.
pub fn pws_family(components: &[FiniteClass], classifications: &[Vec<usize>]) -> Result<FiniteClass> {
    let n = check_components(components)?;
    let cs = distinct(classifications);
    if cs.is_empty() {
        return Err(Error::input("at least one classification is required"));
    }
    for c in &cs {
        if c.len() != n || c.iter().any(|&k| k >= components.len()) {
            return Err(Error::input("classification does not match the components"));
        }
    }
    let sizes: Vec<usize> = components.iter().map(FiniteClass::len).collect();
    let mut rows = Vec::new();
    for c in cs {
        for_each_tuple(&sizes, |t| {
            rows.push((0..n).map(|i| components[c[i]].rows()[t[c[i]]][i]).collect());
        });
    }
    FiniteClass::new(rows)
}

/// Row indices of [`pws_family`] forming the product-net construction: for
/// every classification, all tuples drawn from the given component nets.
///
/// With component nets at scale ε under `d_q`, the result is a
/// `C^{1/q} ε`-net of the family (an ε-net for `q = ∞`).
pub fn product_net_pws(
    components: &[FiniteClass],
    classifications: &[Vec<usize>],
    nets: &[Vec<usize>],
) -> Result<Vec<usize>> {
    check_components(components)?;
    if nets.len() != components.len() {
        return Err(Error::input("one net per component class is required"));
    }
    let sizes: Vec<usize> = components.iter().map(FiniteClass::len).collect();
    let block: usize = sizes.iter().product();
    let net_sizes: Vec<usize> = nets.iter().map(Vec::len).collect();
    let cs = distinct(classifications);
    let mut out = Vec::new();
    for ci in 0..cs.len() {
        for_each_tuple(&net_sizes, |t| {
            let mut offset = 0;
            for (k, &s) in sizes.iter().enumerate() {
                offset = offset * s + nets[k][t[k]];
            }
            out.push(ci * block + offset);
        });
    }
    Ok(out)
}

fn combine_family(
    components: &[FiniteClass],
    combine: impl Fn(usize, &mut dyn Iterator<Item = f64>) -> f64,
) -> Result<FiniteClass> {
    let n = check_components(components)?;
    let sizes: Vec<usize> = components.iter().map(FiniteClass::len).collect();
    let mut rows = Vec::new();
    for_each_tuple(&sizes, |t| {
        rows.push(
            (0..n)
                .map(|i| {
                    let mut vals = components.iter().zip(t).map(|(c, &j)| c.rows()[j][i]);
                    combine(i, &mut vals)
                })
                .collect(),
        );
    });
    FiniteClass::new(rows)
}

/// `{min_k a_k : a_k ∈ A_k}` over every tuple.
pub fn pointwise_min_family(components: &[FiniteClass]) -> Result<FiniteClass> {
    combine_family(components, |_, v| v.fold(f64::INFINITY, f64::min))
}

/// `{max_k a_k : a_k ∈ A_k}` over every tuple.
pub fn pointwise_max_family(components: &[FiniteClass]) -> Result<FiniteClass> {
    combine_family(components, |_, v| v.fold(f64::NEG_INFINITY, f64::max))
}

/// Switching loss family `{(min_k |y_i - f_k(x_i)|^p)_i}` over every tuple.
pub fn switching_loss_family(components: &[FiniteClass], ys: &[f64], p: f64) -> Result<FiniteClass> {
    let loss = LossParams::new(p)?;
    let n = check_components(components)?;
    if ys.len() != n {
        return Err(Error::input("targets do not match the sample length"));
    }
    combine_family(components, |i, v| {
        v.map(|t| loss.loss(ys[i], t)).fold(f64::INFINITY, f64::min)
    })
}
