use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;

use super::solve::{ridge_solve, sub_gram};
use super::{check_fit_input, is_nonincreasing, FitOptions, FitResult};
use crate::data::{empirical_switching_risk, Dataset, LossParams};
use crate::error::{Error, Result};
use crate::models::{ComponentFunction, Kernel, Model, SwitchingModel};
use crate::rng;

/// One component family the alternating scheme can refit.
pub(crate) trait Refit: Sync {
    type Param: Clone + Send;

    fn zero(&self) -> Self::Param;
    /// Fitted values on every training point.
    fn values(&self, p: &Self::Param) -> Vec<f64>;
    /// Ridge least-squares fit on the given training rows.
    fn fit(&self, rows: &[usize]) -> Self::Param;
    /// Projection onto the ball of radius `cap`; reports whether it moved.
    fn project(&self, p: Self::Param, cap: f64) -> (Self::Param, bool);
}

pub(crate) struct LinearRefit<'a> {
    pub xs: &'a [Vec<f64>],
    pub ys: &'a [f64],
    pub lambda: f64,
}

impl<'a> LinearRefit<'a> {
    pub fn new(data: &'a Dataset, ridge: f64) -> Self {
        let trace: f64 = data.xs().iter().map(|x| x.iter().map(|v| v * v).sum::<f64>()).sum();
        LinearRefit {
            xs: data.xs(),
            ys: data.ys(),
            lambda: ridge * trace,
        }
    }
}

impl Refit for LinearRefit<'_> {
    type Param = Vec<f64>;

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.xs[0].len()]
    }

    fn values(&self, w: &Vec<f64>) -> Vec<f64> {
        self.xs
            .iter()
            .map(|x| x.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn fit(&self, rows: &[usize]) -> Vec<f64> {
        let d = self.xs[0].len();
        let mut a = DMatrix::zeros(d, d);
        let mut b = DVector::zeros(d);
        for &i in rows {
            let x = DVector::from_column_slice(&self.xs[i]);
            a += &x * x.transpose();
            b += x * self.ys[i];
        }
        ridge_solve(a, &b, self.lambda).as_slice().to_vec()
    }

    fn project(&self, w: Vec<f64>, cap: f64) -> (Vec<f64>, bool) {
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > cap {
            (w.iter().map(|v| v * cap / norm).collect(), true)
        } else {
            (w, false)
        }
    }
}

struct KernelRefit<'a> {
    gram: DMatrix<f64>,
    ys: &'a [f64],
    lambda: f64,
}

impl Refit for KernelRefit<'_> {
    /// Expansion coefficients over all training points.
    type Param = DVector<f64>;

    fn zero(&self) -> DVector<f64> {
        DVector::zeros(self.ys.len())
    }

    fn values(&self, c: &DVector<f64>) -> Vec<f64> {
        (&self.gram * c).as_slice().to_vec()
    }

    fn fit(&self, rows: &[usize]) -> DVector<f64> {
        let k = sub_gram(&self.gram, rows);
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.ys[i]));
        let alpha = ridge_solve(k, &y, self.lambda);
        let mut c = DVector::zeros(self.ys.len());
        for (j, &i) in rows.iter().enumerate() {
            c[i] = alpha[j];
        }
        c
    }

    fn project(&self, c: DVector<f64>, cap: f64) -> (DVector<f64>, bool) {
        let norm = c.dot(&(&self.gram * &c)).max(0.0).sqrt();
        if norm > cap {
            (c * (cap / norm), true)
        } else {
            (c, false)
        }
    }
}

pub(crate) struct Outcome<P> {
    pub params: Vec<P>,
    pub assign: Vec<usize>,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub projected: bool,
}

impl<P> Outcome<P> {
    pub fn objective(&self) -> f64 {
        *self.history.last().expect("at least one iteration")
    }
}

fn sse(values: &[f64], ys: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&i| (ys[i] - values[i]).powi(2)).sum()
}

/// Assigns every point to its best-fitting mode (ties to the lowest index)
/// and returns the mean squared residual.
fn reassign(values: &[Vec<f64>], ys: &[f64], assign: &mut [usize]) -> f64 {
    let mut total = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let mut best = 0;
        let mut best_r = f64::INFINITY;
        for (k, v) in values.iter().enumerate() {
            let r = (y - v[i]).powi(2);
            if r < best_r {
                best = k;
                best_r = r;
            }
        }
        assign[i] = best;
        total += best_r;
    }
    total / ys.len() as f64
}

/// Moves the worst-fitted point into every empty mode, taking it only from
/// modes that keep at least one point.
fn reseed_empty(values: &[Vec<f64>], ys: &[f64], assign: &mut [usize]) {
    let modes = values.len();
    let mut counts = vec![0usize; modes];
    for &a in assign.iter() {
        counts[a] += 1;
    }
    for k in 0..modes {
        if counts[k] > 0 {
            continue;
        }
        let mut worst: Option<(usize, f64)> = None;
        for (i, y) in ys.iter().enumerate() {
            if counts[assign[i]] < 2 {
                continue;
            }
            let r = (y - values[assign[i]][i]).powi(2);
            if worst.is_none_or(|(_, w)| r > w) {
                worst = Some((i, r));
            }
        }
        if let Some((i, _)) = worst {
            counts[assign[i]] -= 1;
            assign[i] = k;
            counts[k] += 1;
        }
    }
}

fn rows_of(assign: &[usize], k: usize) -> Vec<usize> {
    assign
        .iter()
        .enumerate()
        .filter(|(_, &a)| a == k)
        .map(|(i, _)| i)
        .collect()
}

/// Refits every mode on its assigned rows, keeping the old component unless
/// the new one lowers that mode's squared error.
pub(crate) fn refit_modes<R: Refit>(
    refit: &R,
    ys: &[f64],
    assign: &[usize],
    params: &mut [R::Param],
    values: &mut [Vec<f64>],
    cap: Option<f64>,
) -> bool {
    let mut projected = false;
    for k in 0..params.len() {
        let rows = rows_of(assign, k);
        let mut cand = refit.fit(&rows);
        let mut moved = false;
        if let Some(cap) = cap {
            (cand, moved) = refit.project(cand, cap);
        }
        let cand_values = refit.values(&cand);
        if sse(&cand_values, ys, &rows) < sse(&values[k], ys, &rows) {
            params[k] = cand;
            values[k] = cand_values;
            projected |= moved;
        }
    }
    projected
}

fn run_restart<R: Refit>(refit: &R, ys: &[f64], modes: usize, opts: &FitOptions, restart: u64) -> Outcome<R::Param> {
    let n = ys.len();
    let mut rng = rng::stream(opts.seed, &[restart]);
    let mut assign: Vec<usize> = (0..n).map(|_| rng.random_range(0..modes)).collect();
    let mut params = vec![refit.zero(); modes];
    let mut values = vec![vec![0.0; n]; modes];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut projected = false;
    let mut prev = f64::INFINITY;
    while iterations < opts.max_iters {
        let saved = (params.clone(), assign.clone());
        reseed_empty(&values, ys, &mut assign);
        let moved = refit_modes(refit, ys, &assign, &mut params, &mut values, opts.norm_cap);
        let obj = reassign(&values, ys, &mut assign);
        iterations += 1;
        if obj > prev {
            // only re-seeding can get here; undo the step
            (params, assign) = saved;
            break;
        }
        projected |= moved;
        history.push(obj);
        if prev - obj < opts.tol {
            break;
        }
        prev = obj;
    }
    Outcome {
        params,
        assign,
        history,
        iterations,
        projected,
    }
}

/// Runs all restarts (in parallel) and returns the best one, ties going to
/// the lowest restart index, together with whether every restart was
/// monotone.
pub(crate) fn alternate<R: Refit>(refit: &R, ys: &[f64], modes: usize, opts: &FitOptions) -> (Outcome<R::Param>, bool) {
    let outcomes: Vec<Outcome<R::Param>> = (0..opts.restarts as u64)
        .into_par_iter()
        .map(|r| run_restart(refit, ys, modes, opts, r))
        .collect();
    let monotone = outcomes.iter().all(|o| is_nonincreasing(&o.history));
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.objective() < outcomes[best].objective() {
            best = r;
        }
    }
    (outcomes.into_iter().nth(best).expect("restarts >= 1"), monotone)
}

pub(crate) fn switching_result(
    model: SwitchingModel,
    data: &Dataset,
    outcome: Outcome<impl Sized>,
    restarts: usize,
    monotone: bool,
) -> Result<FitResult> {
    let objective = empirical_switching_risk(&model.predict_dataset(data)?, data, LossParams::squared())?;
    Ok(FitResult {
        model: Model::Switching(model),
        objective,
        raw_objective: outcome.objective(),
        assignments: outcome.assign,
        iterations: outcome.iterations,
        restarts_used: restarts,
        projected: outcome.projected,
        monotone,
        switching_objective: None,
        history: outcome.history,
    })
}

/// Switching linear regression by alternating least squares.
///
/// Each restart starts from uniformly random assignments, then alternates
/// between refitting every mode by ridge regression on its points and
/// reassigning every point to its best-fitting mode. Empty modes are
/// re-seeded with the worst-fitted point. With `norm_cap` set, refitted
/// weights are projected onto the Euclidean ball of that radius.
pub fn fit_switching_linear(data: &Dataset, modes: usize, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    check_fit_input(data, modes)?;
    let refit = LinearRefit::new(data, opts.ridge);
    let (outcome, monotone) = alternate(&refit, data.ys(), modes, opts);
    let components = outcome.params.iter().cloned().map(ComponentFunction::linear).collect();
    let model = SwitchingModel::new(components, data.half_range())?;
    switching_result(model, data, outcome, opts.restarts, monotone)
}

/// Switching kernel regression: [`fit_switching_linear`] with per-mode
/// kernel ridge refits. With `norm_cap` set, each refitted component is
/// scaled back onto the RKHS ball of that radius.
pub fn fit_switching_kernel(data: &Dataset, modes: usize, kernel: Kernel, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    kernel.validate()?;
    check_fit_input(data, modes)?;
    let gram = kernel.gram(data.xs());
    let scale = gram.diagonal().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let min_eig = gram.clone().symmetric_eigenvalues().min();
    if min_eig < -1e-10 * scale {
        return Err(Error::Numerical(format!(
            "Gram matrix is not positive semidefinite (min eigenvalue {min_eig:e})"
        )));
    }
    let lambda = opts.ridge * gram.trace();
    let refit = KernelRefit {
        gram,
        ys: data.ys(),
        lambda,
    };
    let (outcome, monotone) = alternate(&refit, data.ys(), modes, opts);
    let components = outcome
        .params
        .iter()
        .map(|c| {
            let (support, coef): (Vec<Vec<f64>>, Vec<f64>) = c
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != 0.0)
                .map(|(i, &a)| (data.xs()[i].clone(), a))
                .unzip();
            ComponentFunction::kernel(kernel, support, coef)
        })
        .collect::<Result<Vec<_>>>()?;
    let model = SwitchingModel::new(components, data.half_range())?;
    switching_result(model, data, outcome, opts.restarts, monotone)
}
