use super::{argmax, ClassId};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearKind {
    Svm,
    Lr,
}

/// Solver bookkeeping. The SVM keeps one entry per one-vs-rest problem; the
/// joint logistic regression keeps a single entry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingMeta {
    pub iterations: Vec<u64>,
    pub objectives: Vec<f64>,
}

/// Per-class weight vectors and biases: `score(c) = w_c·x + b_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub n_classes: usize,
    pub n_features: usize,
    /// Row-major `n_classes × n_features`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub c_reg: f64,
    pub meta: TrainingMeta,
}

impl LinearModel {
    pub fn class_weights(&self, class: ClassId) -> &[f64] {
        &self.weights[class * self.n_features..(class + 1) * self.n_features]
    }

    pub fn decision_function(&self, x: &SparseVector) -> Vec<f64> {
        (0..self.n_classes)
            .map(|c| x.dot(self.class_weights(c)) + self.bias[c])
            .collect()
    }
}

/// Argmax of the decision values, ties to the smallest class id.
pub fn linear_predict(model: &LinearModel, x: &SparseVector) -> (ClassId, Vec<f64>) {
    let scores = model.decision_function(x);
    (argmax(&scores), scores)
}
