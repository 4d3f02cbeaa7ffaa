//! Multinomial logistic regression.
//!
//! Minimizes `Σ_i −ln p(y_i | x_i) + ‖W‖² / (2C)` over weights `W` and an
//! unregularized bias, with L-BFGS and an Armijo backtracking line search.

use std::collections::VecDeque;

use super::linear::{LinearKind, LinearModel, TrainingMeta};
use super::{log_sum_exp, TrainSettings, TrainingSet};
use crate::error::{Error, Result};
use crate::features::SparseVector;

const HISTORY: usize = 7;
const ARMIJO: f64 = 1e-4;
const MAX_LINE_SEARCH: usize = 40;

/// Softmax of `scores`, in place.
pub fn softmax(scores: &mut [f64]) {
    let norm = log_sum_exp(scores);
    scores.iter_mut().for_each(|s| *s = (*s - norm).exp());
}

/// Objective at row-major weights `w` (`k × v`) and bias `b` (`k`).
pub fn lr_objective(data: &TrainingSet<'_>, w: &[f64], b: &[f64], c: f64) -> f64 {
    evaluate(data, w, b, c, None)
}

/// Gradient of [`lr_objective`]: `(∂W, ∂b)`.
pub fn lr_gradient(data: &TrainingSet<'_>, w: &[f64], b: &[f64], c: f64) -> (Vec<f64>, Vec<f64>) {
    let (k, v) = (data.n_classes, data.n_features);
    let mut grad = vec![0.0; k * v + k];
    evaluate(data, w, b, c, Some(&mut grad));
    let gb = grad.split_off(k * v);
    (grad, gb)
}

fn scores(x: &SparseVector, w: &[f64], b: &[f64], v: usize, out: &mut [f64]) {
    for (c, s) in out.iter_mut().enumerate() {
        *s = x.dot(&w[c * v..(c + 1) * v]) + b[c];
    }
}

/// Objective, optionally writing the gradient into `grad` (`k·v` weight
/// entries followed by `k` bias entries).
fn evaluate(data: &TrainingSet<'_>, w: &[f64], b: &[f64], c: f64, mut grad: Option<&mut [f64]>) -> f64 {
    let (k, v) = (data.n_classes, data.n_features);
    let mut f = 0.5 * w.iter().map(|x| x * x).sum::<f64>() / c;
    if let Some(g) = grad.as_deref_mut() {
        for (gi, wi) in g[..k * v].iter_mut().zip(w) {
            *gi = wi / c;
        }
        g[k * v..].iter_mut().for_each(|gi| *gi = 0.0);
    }
    let mut z = vec![0.0; k];
    for (x, &y) in data.x.iter().zip(data.y) {
        scores(x, w, b, v, &mut z);
        let norm = log_sum_exp(&z);
        f += norm - z[y];
        if let Some(g) = grad.as_deref_mut() {
            for (cls, &zc) in z.iter().enumerate() {
                let residual = (zc - norm).exp() - if cls == y { 1.0 } else { 0.0 };
                let row = &mut g[cls * v..(cls + 1) * v];
                for (j, value) in x.iter() {
                    row[j] += residual * value;
                }
                g[k * v + cls] += residual;
            }
        }
    }
    f
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn lr_fit(data: &TrainingSet<'_>, settings: &TrainSettings) -> Result<LinearModel> {
    settings.validate()?;
    if data.n_classes < 2 {
        return Err(Error::invalid("logistic regression needs at least two classes"));
    }
    let (k, v) = (data.n_classes, data.n_features);
    let c = settings.c_reg;
    let dim = k * v + k;
    let split_eval = |params: &[f64], grad: &mut [f64]| {
        let (w, b) = params.split_at(k * v);
        evaluate(data, w, b, c, Some(grad))
    };

    let mut params = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut f = split_eval(&params, &mut grad);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0u64;
    let mut next = vec![0.0; dim];
    let mut next_grad = vec![0.0; dim];

    while iterations < settings.max_iters as u64 {
        iterations += 1;
        // Two-loop recursion for the search direction.
        let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &dir);
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            dir.iter_mut().for_each(|d| *d *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (a - beta) * si);
        }
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = -dot(&grad, &grad);
        }
        if slope == 0.0 {
            break;
        }

        let mut step = if history.is_empty() {
            (1.0 / dot(&grad, &grad).sqrt()).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..MAX_LINE_SEARCH {
            for ((n, p), d) in next.iter_mut().zip(&params).zip(&dir) {
                *n = p + step * d;
            }
            let f_next = split_eval(&next, &mut next_grad);
            if f_next.is_finite() && f_next <= f + ARMIJO * step * slope {
                accepted = Some(f_next);
                break;
            }
            step *= 0.5;
        }
        let Some(f_next) = accepted else {
            break;
        };
        if !f_next.is_finite() {
            return Err(Error::Training(format!("logistic objective became {f_next}")));
        }
        let s: Vec<f64> = next.iter().zip(&params).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == HISTORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut params, &mut next);
        std::mem::swap(&mut grad, &mut next_grad);
        let prev = f;
        f = f_next;
        if (prev - f).abs() <= settings.tol * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }

    let bias = params.split_off(k * v);
    Ok(LinearModel {
        kind: LinearKind::Lr,
        n_classes: k,
        n_features: v,
        weights: params,
        bias,
        c_reg: c,
        meta: TrainingMeta {
            iterations: vec![iterations],
            objectives: vec![f],
        },
    })
}
