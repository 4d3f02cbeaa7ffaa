use super::{argmax, log_sum_exp, ClassId, TrainingSet};
use crate::error::{Error, Result};
use crate::features::SparseVector;

/// Multinomial naive Bayes with additive smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct MnbModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub alpha: f64,
    /// `ln P(c)`
    pub log_prior: Vec<f64>,
    /// `ln θ[c][t]`, row-major `n_classes × n_features`.
    pub log_likelihood: Vec<f64>,
}

impl MnbModel {
    pub fn class_log_likelihood(&self, class: ClassId) -> &[f64] {
        &self.log_likelihood[class * self.n_features..(class + 1) * self.n_features]
    }
}

/// `θ[c][t] = (alpha + N[c][t]) / (alpha·V + N[c])`, `P(c) = count(c) / N`.
///
/// Feature values may be fractional (TF-IDF weights are used as counts) but
/// must not be negative.
pub fn mnb_fit(data: &TrainingSet<'_>, alpha: f64) -> Result<MnbModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha must be positive"));
    }
    let (k, v) = (data.n_classes, data.n_features);
    let mut feature_count = vec![0.0f64; k * v];
    let mut class_count = vec![0usize; k];
    for (x, &c) in data.x.iter().zip(data.y) {
        class_count[c] += 1;
        let row = &mut feature_count[c * v..(c + 1) * v];
        for (t, value) in x.iter() {
            if value < 0.0 {
                return Err(Error::invalid("multinomial naive Bayes needs non-negative features"));
            }
            row[t] += value;
        }
    }
    let n = data.len() as f64;
    let log_prior = class_count.iter().map(|&c| (c as f64 / n).ln()).collect();
    let mut log_likelihood = feature_count;
    for row in log_likelihood.chunks_mut(v.max(1)).take(k) {
        let total: f64 = row.iter().sum();
        let denom = (alpha * v as f64 + total).ln();
        for cell in row.iter_mut() {
            *cell = (alpha + *cell).ln() - denom;
        }
    }
    Ok(MnbModel {
        n_classes: k,
        n_features: v,
        alpha,
        log_prior,
        log_likelihood,
    })
}

/// Returns the argmax class and normalized log-posteriors. Ties go to the
/// smallest class id; an empty vector scores on the prior alone.
pub fn mnb_predict(model: &MnbModel, x: &SparseVector) -> (ClassId, Vec<f64>) {
    let mut scores: Vec<f64> = (0..model.n_classes)
        .map(|c| {
            let ll = model.class_log_likelihood(c);
            model.log_prior[c] + x.iter().map(|(t, value)| value * ll[t]).sum::<f64>()
        })
        .collect();
    let class = argmax(&scores);
    let norm = log_sum_exp(&scores);
    scores.iter_mut().for_each(|s| *s -= norm);
    (class, scores)
}
