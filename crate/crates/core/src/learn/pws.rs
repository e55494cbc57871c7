use super::alternating::{refit_modes, LinearRefit, Refit};
use super::{fit_switching_linear, FitOptions, FitResult};
use crate::data::{empirical_lp_risk, Dataset, LossParams};
use crate::error::Result;
use crate::models::{ComponentFunction, LinearClassifier, Model, PwsModel};

const SOFTMAX_ITERS: usize = 1000;
const SOFTMAX_REG: f64 = 1e-6;
const PERCEPTRON_EPOCHS: usize = 2000;

fn argmax(weights: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (k, w) in weights.iter().enumerate() {
        let s: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
        if s > best_score {
            best = k;
            best_score = s;
        }
    }
    best
}

fn mistakes(weights: &[Vec<f64>], xs: &[Vec<f64>], labels: &[usize]) -> usize {
    xs.iter().zip(labels).filter(|(x, &l)| argmax(weights, x) != l).count()
}

/// Multinomial logistic regression by gradient descent.
fn softmax_fit(xs: &[Vec<f64>], labels: &[usize], modes: usize) -> Vec<Vec<f64>> {
    let n = xs.len() as f64;
    let d = xs[0].len();
    let r2 = xs.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / (0.5 * r2 + SOFTMAX_REG).max(1e-12);
    let mut w = vec![vec![0.0; d]; modes];
    let mut probs = vec![0.0; modes];
    for _ in 0..SOFTMAX_ITERS {
        let mut grad = vec![vec![0.0; d]; modes];
        for (x, &label) in xs.iter().zip(labels) {
            let scores: Vec<f64> = w.iter().map(|wk| wk.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
            let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for (p, s) in probs.iter_mut().zip(&scores) {
                *p = (s - top).exp();
                z += *p;
            }
            for (k, g) in grad.iter_mut().enumerate() {
                let coeff = probs[k] / z - if k == label { 1.0 } else { 0.0 };
                for (gj, xj) in g.iter_mut().zip(x) {
                    *gj += coeff * xj / n;
                }
            }
        }
        for (wk, gk) in w.iter_mut().zip(&grad) {
            for (wj, gj) in wk.iter_mut().zip(gk) {
                *wj -= step * (gj + SOFTMAX_REG * *wj);
            }
        }
    }
    w
}

/// Linear classifier reproducing `labels` as closely as possible: softmax
/// regression followed by multiclass perceptron passes, keeping the weights
/// with the fewest training mistakes.
fn fit_classifier(xs: &[Vec<f64>], labels: &[usize], modes: usize) -> Vec<Vec<f64>> {
    let mut w = softmax_fit(xs, labels, modes);
    let mut best = w.clone();
    let mut best_errors = mistakes(&w, xs, labels);
    for _ in 0..PERCEPTRON_EPOCHS {
        if best_errors == 0 {
            break;
        }
        for (x, &label) in xs.iter().zip(labels) {
            let k = argmax(&w, x);
            if k != label {
                for j in 0..x.len() {
                    w[label][j] += x[j];
                    w[k][j] -= x[j];
                }
            }
        }
        let errors = mistakes(&w, xs, labels);
        if errors < best_errors {
            best = w.clone();
            best_errors = errors;
        }
    }
    best
}

/// PWS linear regression with a linear classifier.
///
/// Fits a switching linear model, trains a classifier to reproduce its
/// assignments, then reassigns points by the classifier and refits every
/// component once on its region.
pub fn fit_pws(data: &Dataset, modes: usize, opts: &FitOptions) -> Result<FitResult> {
    let stage_one = fit_switching_linear(data, modes, opts)?;
    let Model::Switching(sw) = &stage_one.model else {
        unreachable!("switching fit returns a switching model")
    };
    let mut params: Vec<Vec<f64>> = sw
        .components()
        .iter()
        .map(|c| match c {
            ComponentFunction::Linear { w } => w.clone(),
            ComponentFunction::Kernel { .. } => unreachable!("linear fit"),
        })
        .collect();

    let classifier = if modes == 1 {
        LinearClassifier::trivial(1, data.dim())
    } else {
        LinearClassifier::new(fit_classifier(data.xs(), &stage_one.assignments, modes))?
    };
    let regions: Vec<usize> = data.xs().iter().map(|x| classifier.classify_unchecked(x)).collect();

    let refit = LinearRefit::new(data, opts.ridge);
    let mut values: Vec<Vec<f64>> = params.iter().map(|w| refit.values(w)).collect();
    let projected = refit_modes(&refit, data.ys(), &regions, &mut params, &mut values, opts.norm_cap);

    let raw: f64 = data
        .ys()
        .iter()
        .enumerate()
        .map(|(i, y)| (y - values[regions[i]][i]).powi(2))
        .sum::<f64>()
        / data.len() as f64;
    let components = params.into_iter().map(ComponentFunction::linear).collect();
    let model = PwsModel::new(classifier, components, data.half_range())?;
    let objective = empirical_lp_risk(&model.predict_dataset(data)?, data, LossParams::squared())?;
    let mut history = stage_one.history.clone();
    history.push(raw);
    Ok(FitResult {
        model: Model::Pws(model),
        objective,
        raw_objective: raw,
        history,
        assignments: regions,
        iterations: stage_one.iterations + 1,
        restarts_used: stage_one.restarts_used,
        projected: stage_one.projected || projected,
        monotone: stage_one.monotone,
        switching_objective: Some(stage_one.objective),
    })
}
