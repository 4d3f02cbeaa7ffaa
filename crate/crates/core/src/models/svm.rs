//! One-vs-rest L2-regularized squared-hinge SVM.
//!
//! Each binary problem minimizes
//! `½‖w‖² + C Σ max(0, 1 − s_i (w·x_i + b))²` with an unregularized bias,
//! by a primal truncated Newton method (the generalized Hessian of the
//! squared hinge is used inside conjugate gradients). Each iteration ends
//! with an Armijo line search, so the objective never increases.

use rayon::prelude::*;

use super::linear::{LinearKind, LinearModel, TrainingMeta};
use super::{TrainSettings, TrainingSet};
use crate::error::{Error, Result};
use crate::features::SparseVector;

const ARMIJO: f64 = 1e-4;
const MAX_LINE_SEARCH: usize = 40;
const CG_REL_TOL: f64 = 0.1;
const MAX_CG: usize = 250;

/// The binary objective at `(w, b)`; `signs[i]` is `+1` or `-1`.
pub fn squared_hinge_objective(x: &[SparseVector], signs: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = x
        .iter()
        .zip(signs)
        .map(|(xi, &s)| (1.0 - s * (xi.dot(w) + b)).max(0.0).powi(2))
        .sum();
    reg + c * loss
}

/// Gradient of [`squared_hinge_objective`] with respect to `w` and `b`.
pub fn squared_hinge_gradient(
    x: &[SparseVector],
    signs: &[f64],
    w: &[f64],
    b: f64,
    c: f64,
) -> (Vec<f64>, f64) {
    let mut gw = w.to_vec();
    let mut gb = 0.0;
    for (xi, &s) in x.iter().zip(signs) {
        let slack = 1.0 - s * (xi.dot(w) + b);
        if slack > 0.0 {
            let coef = -2.0 * c * s * slack;
            for (j, v) in xi.iter() {
                gw[j] += coef * v;
            }
            gb += coef;
        }
    }
    (gw, gb)
}

/// Result of one binary problem.
struct Binary {
    w: Vec<f64>,
    b: f64,
    iterations: u64,
    /// Objective before the first iteration, then after each one.
    trace: Vec<f64>,
}

/// Per-example `1 − s_i (w·x_i + b)`.
fn slacks(x: &[SparseVector], signs: &[f64], w: &[f64], b: f64) -> Vec<f64> {
    x.iter().zip(signs).map(|(xi, &s)| 1.0 - s * (xi.dot(w) + b)).collect()
}

fn objective_from_slack(w: &[f64], slack: &[f64], c: f64) -> f64 {
    0.5 * dot(w, w) + c * slack.iter().map(|s| s.max(0.0).powi(2)).sum::<f64>()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generalized Hessian product `(v_w, v_b) ↦ (v_w + 2C X_Aᵀ X_A v, 2C 1ᵀ X_A v)`
/// over the active set `A` (examples with positive slack).
fn hessian_product(x: &[SparseVector], active: &[usize], c: f64, v: &[f64], vb: f64, out: &mut [f64]) -> f64 {
    out.copy_from_slice(v);
    let mut out_b = 0.0;
    for &i in active {
        let t = 2.0 * c * (x[i].dot(v) + vb);
        for (j, value) in x[i].iter() {
            out[j] += t * value;
        }
        out_b += t;
    }
    out_b
}

/// Approximately solves `H d = −g` by conjugate gradients, stopping once the
/// residual falls to `CG_REL_TOL · ‖g‖`.
fn newton_direction(
    x: &[SparseVector],
    active: &[usize],
    c: f64,
    gw: &[f64],
    gb: f64,
) -> (Vec<f64>, f64) {
    let n = gw.len();
    let mut d = vec![0.0; n];
    let mut db = 0.0;
    let mut r: Vec<f64> = gw.iter().map(|g| -g).collect();
    let mut rb = -gb;
    let mut p = r.clone();
    let mut pb = rb;
    let mut hp = vec![0.0; n];
    let mut rr = dot(&r, &r) + rb * rb;
    let stop = CG_REL_TOL * CG_REL_TOL * rr;
    for _ in 0..MAX_CG {
        if rr <= stop {
            break;
        }
        let hpb = hessian_product(x, active, c, &p, pb, &mut hp);
        let php = dot(&p, &hp) + pb * hpb;
        if php <= 0.0 {
            break;
        }
        let alpha = rr / php;
        for j in 0..n {
            d[j] += alpha * p[j];
            r[j] -= alpha * hp[j];
        }
        db += alpha * pb;
        rb -= alpha * hpb;
        let rr_new = dot(&r, &r) + rb * rb;
        let beta = rr_new / rr;
        for j in 0..n {
            p[j] = r[j] + beta * p[j];
        }
        pb = rb + beta * pb;
        rr = rr_new;
    }
    (d, db)
}

/// Truncated Newton on the primal: conjugate-gradient directions on the
/// generalized Hessian, then an Armijo backtracking line search, so the
/// objective never increases between iterations.
fn solve_binary(x: &[SparseVector], signs: &[f64], n_features: usize, settings: &TrainSettings) -> Result<Binary> {
    let c = settings.c_reg;
    let mut w = vec![0.0; n_features];
    let mut b = 0.0;
    let mut slack = vec![1.0; signs.len()];
    let mut f = objective_from_slack(&w, &slack, c);
    let mut trace = vec![f];
    let mut iterations = 0;

    while iterations < settings.max_iters as u64 {
        iterations += 1;
        let active: Vec<usize> = (0..slack.len()).filter(|&i| slack[i] > 0.0).collect();
        let mut gw = w.clone();
        let mut gb = 0.0;
        for &i in &active {
            let coef = -2.0 * c * signs[i] * slack[i];
            for (j, value) in x[i].iter() {
                gw[j] += coef * value;
            }
            gb += coef;
        }
        if dot(&gw, &gw) + gb * gb == 0.0 {
            trace.push(f);
            break;
        }
        let (dw, db) = newton_direction(x, &active, c, &gw, gb);
        let slope = dot(&gw, &dw) + gb * db;
        if slope >= 0.0 {
            trace.push(f);
            break;
        }
        // Slack moves linearly along the direction.
        let z: Vec<f64> = x.iter().zip(signs).map(|(xi, &s)| s * (xi.dot(&dw) + db)).collect();
        let (ww, wd, dd) = (dot(&w, &w), dot(&w, &dw), dot(&dw, &dw));
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_LINE_SEARCH {
            let loss: f64 = slack
                .iter()
                .zip(&z)
                .map(|(sl, zi)| (sl - step * zi).max(0.0).powi(2))
                .sum();
            let trial = 0.5 * (ww + 2.0 * step * wd + step * step * dd) + c * loss;
            if trial <= f + ARMIJO * step * slope {
                accepted = Some(step);
                break;
            }
            step *= 0.5;
        }
        let Some(step) = accepted else {
            trace.push(f);
            break;
        };
        for (wj, dj) in w.iter_mut().zip(&dw) {
            *wj += step * dj;
        }
        b += step * db;
        slack = slacks(x, signs, &w, b);
        let next = objective_from_slack(&w, &slack, c);
        if !next.is_finite() {
            return Err(Error::Training(format!(
                "squared-hinge objective became {next} after {iterations} iterations"
            )));
        }
        trace.push(next);
        let done = (f - next).abs() <= settings.tol * f.abs().max(f64::MIN_POSITIVE);
        f = next;
        if done {
            break;
        }
    }
    Ok(Binary { w, b, iterations, trace })
}

/// Trains one binary problem per class (class `c` positive, the rest negative).
pub fn svm_fit(data: &TrainingSet<'_>, settings: &TrainSettings) -> Result<LinearModel> {
    svm_fit_traced(data, settings).map(|(m, _)| m)
}

/// [`svm_fit`], also returning each class's per-epoch objective trace
/// (starting with the objective at zero, `C·N`).
pub fn svm_fit_traced(data: &TrainingSet<'_>, settings: &TrainSettings) -> Result<(LinearModel, Vec<Vec<f64>>)> {
    settings.validate()?;
    if data.n_classes < 2 {
        return Err(Error::invalid("the SVM needs at least two classes"));
    }
    let solved: Vec<Binary> = (0..data.n_classes)
        .into_par_iter()
        .map(|class| {
            let signs: Vec<f64> = data.y.iter().map(|&y| if y == class { 1.0 } else { -1.0 }).collect();
            solve_binary(data.x, &signs, data.n_features, settings)
        })
        .collect::<Result<_>>()?;
    let mut weights = Vec::with_capacity(data.n_classes * data.n_features);
    let mut bias = Vec::with_capacity(data.n_classes);
    let mut meta = TrainingMeta::default();
    let mut traces = Vec::with_capacity(data.n_classes);
    for (class, binary) in solved.into_iter().enumerate() {
        log::debug!(
            "svm class {class}: {} epochs, objective {}",
            binary.iterations,
            binary.trace.last().unwrap()
        );
        weights.extend_from_slice(&binary.w);
        bias.push(binary.b);
        meta.iterations.push(binary.iterations);
        meta.objectives.push(*binary.trace.last().unwrap());
        traces.push(binary.trace);
    }
    Ok((
        LinearModel {
            kind: LinearKind::Svm,
            n_classes: data.n_classes,
            n_features: data.n_features,
            weights,
            bias,
            c_reg: settings.c_reg,
            meta,
        },
        traces,
    ))
}
