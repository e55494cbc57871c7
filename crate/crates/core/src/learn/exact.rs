use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::alternating::{switching_result, LinearRefit, Outcome, Refit};
use super::{check_fit_input, FitOptions, FitResult};
use super::solve::ridge_solve;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{ComponentFunction, SwitchingModel};

/// Largest number of assignments `C^n` [`fit_switching_exact`] enumerates.
pub const MAX_EXACT_ASSIGNMENTS: u64 = 2_000_000;

/// Squared error of the ridge fit on the rows summarized by `a = Σ x xᵀ`,
/// `b = Σ x y`, `yy = Σ y²`.
fn mode_sse(a: &DMatrix<f64>, b: &DVector<f64>, yy: f64, lambda: f64) -> f64 {
    let w = ridge_solve(a.clone(), b, lambda);
    (yy - 2.0 * w.dot(b) + w.dot(&(a * &w))).max(0.0)
}

/// Global least-squares switching fit by enumerating all `C^n` assignments
/// (with the first point pinned to mode 0, which loses nothing up to
/// relabeling). Uses the same ridge strength as [`super::fit_switching_linear`]
/// with default options.
pub fn fit_switching_exact(data: &Dataset, modes: usize) -> Result<FitResult> {
    check_fit_input(data, modes)?;
    let n = data.len();
    let total = (modes as u64).checked_pow(n as u32).filter(|&t| t <= MAX_EXACT_ASSIGNMENTS);
    if total.is_none() {
        return Err(Error::ResourceLimit(format!(
            "C^n = {modes}^{n} exceeds {MAX_EXACT_ASSIGNMENTS} assignments"
        )));
    }
    let ridge = FitOptions::default().ridge;
    let refit = LinearRefit::new(data, ridge);
    let d = data.dim();
    let outer: Vec<DMatrix<f64>> = data
        .xs()
        .iter()
        .map(|x| {
            let v = DVector::from_column_slice(x);
            &v * v.transpose()
        })
        .collect();
    let cross: Vec<DVector<f64>> = data
        .xs()
        .iter()
        .zip(data.ys())
        .map(|(x, y)| DVector::from_column_slice(x) * *y)
        .collect();
    let decode = |mut code: u64| -> Vec<usize> {
        let mut assign = vec![0; n];
        for a in assign.iter_mut().skip(1) {
            *a = (code % modes as u64) as usize;
            code /= modes as u64;
        }
        assign
    };
    let count = (modes as u64).pow(n as u32 - 1);
    let (best_sse, best_code) = (0..count)
        .into_par_iter()
        .map(|code| {
            let assign = decode(code);
            let mut a = vec![DMatrix::zeros(d, d); modes];
            let mut b = vec![DVector::zeros(d); modes];
            let mut yy = vec![0.0; modes];
            for (i, &k) in assign.iter().enumerate() {
                a[k] += &outer[i];
                b[k] += &cross[i];
                yy[k] += data.ys()[i] * data.ys()[i];
            }
            let sse: f64 = (0..modes).map(|k| mode_sse(&a[k], &b[k], yy[k], refit.lambda)).sum();
            (sse, code)
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |x, y| if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x },
        );
    debug_assert!(best_sse.is_finite());
    let mut assign = decode(best_code);
    let params: Vec<Vec<f64>> = (0..modes)
        .map(|k| {
            let rows: Vec<usize> = (0..n).filter(|&i| assign[i] == k).collect();
            refit.fit(&rows)
        })
        .collect();
    let values: Vec<Vec<f64>> = params.iter().map(|w| refit.values(w)).collect();
    // every point to its best mode; never worse than the enumerated split
    let mut total_sq = 0.0;
    for (i, y) in data.ys().iter().enumerate() {
        let (k, r) = (0..modes)
            .map(|k| (k, (y - values[k][i]).powi(2)))
            .fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
        assign[i] = k;
        total_sq += r;
    }
    let outcome = Outcome {
        params: params.clone(),
        assign,
        history: vec![total_sq / n as f64],
        iterations: 1,
        projected: false,
    };
    let components = params.into_iter().map(ComponentFunction::linear).collect();
    let model = SwitchingModel::new(components, data.half_range())?;
    switching_result(model, data, outcome, 1, true)
}
