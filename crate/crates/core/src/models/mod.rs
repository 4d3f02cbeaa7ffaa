//! The three learners: multinomial naive Bayes, one-vs-rest linear SVM with
//! squared hinge loss, and multinomial logistic regression.

mod io;
mod linear;
mod lr;
mod mnb;
mod svm;

use std::str::FromStr;

pub use io::{decode_model, encode_model, load_model, save_model, MAGIC, VERSION};
pub use linear::{linear_predict, LinearKind, LinearModel, TrainingMeta};
pub use lr::{lr_fit, lr_gradient, lr_objective, softmax};
pub use mnb::{mnb_fit, mnb_predict, MnbModel};
pub use svm::{squared_hinge_gradient, squared_hinge_objective, svm_fit, svm_fit_traced};

use crate::error::{Error, Result};
use crate::features::SparseVector;

pub type ClassId = usize;

/// Fixed learner parameters. Defaults: `C = 1`, `alpha = 1`, relative
/// objective tolerance `1e-6`, at most 1000 epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub c_reg: f64,
    pub alpha: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            c_reg: 1.0,
            alpha: 1.0,
            max_iters: 1000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

impl TrainSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_reg > 0.0 && self.c_reg.is_finite()) {
            return Err(Error::invalid("C must be positive and finite"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha must be positive and finite"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Mnb,
    Svm,
    Lr,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mnb => "mnb",
            ModelKind::Svm => "svm",
            ModelKind::Lr => "lr",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnb" => Ok(ModelKind::Mnb),
            "svm" => Ok(ModelKind::Svm),
            "lr" => Ok(ModelKind::Lr),
            other => Err(Error::invalid(format!("unknown model {other:?}"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Validated training data: `n_classes` classes, each present at least once.
#[derive(Debug, Clone, Copy)]
pub struct TrainingSet<'a> {
    pub x: &'a [SparseVector],
    pub y: &'a [ClassId],
    pub n_classes: usize,
    pub n_features: usize,
}

impl<'a> TrainingSet<'a> {
    pub fn new(x: &'a [SparseVector], y: &'a [ClassId], n_classes: usize, n_features: usize) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::invalid(format!(
                "need matching nonempty X and y, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        let mut seen = vec![false; n_classes];
        for &c in y {
            if c >= n_classes {
                return Err(Error::invalid(format!("class {c} out of range 0..{n_classes}")));
            }
            seen[c] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("class {c} has no training examples")));
        }
        for v in x {
            if v.min_dim() > n_features {
                return Err(Error::invalid("feature index out of range"));
            }
            if v.values().iter().any(|f| !f.is_finite()) {
                return Err(Error::invalid("non-finite feature value"));
            }
        }
        Ok(TrainingSet {
            x,
            y,
            n_classes,
            n_features,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Index of the largest score; ties go to the smallest index.
pub fn argmax(scores: &[f64]) -> ClassId {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// `ln Σ exp(v)`, computed stably.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// A trained classifier of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Mnb(MnbModel),
    Linear(LinearModel),
}

/// Predicted class and per-class scores (log-posteriors for MNB, decision
/// values for the linear models).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: ClassId,
    pub scores: Vec<f64>,
}

impl Model {
    pub fn fit(kind: ModelKind, data: &TrainingSet<'_>, settings: &TrainSettings) -> Result<Model> {
        Ok(match kind {
            ModelKind::Mnb => Model::Mnb(mnb_fit(data, settings.alpha)?),
            ModelKind::Svm => Model::Linear(svm_fit(data, settings)?),
            ModelKind::Lr => Model::Linear(lr_fit(data, settings)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Mnb(_) => ModelKind::Mnb,
            Model::Linear(m) => match m.kind {
                LinearKind::Svm => ModelKind::Svm,
                LinearKind::Lr => ModelKind::Lr,
            },
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Mnb(m) => m.n_classes,
            Model::Linear(m) => m.n_classes,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Mnb(m) => m.n_features,
            Model::Linear(m) => m.n_features,
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let (class, scores) = match self {
            Model::Mnb(m) => mnb_predict(m, x),
            Model::Linear(m) => linear_predict(m, x),
        };
        Prediction { class, scores }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_to_smallest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn training_set_validation() {
        let x = vec![SparseVector::from_pairs(vec![(0, 1.0)]); 2];
        assert!(TrainingSet::new(&x, &[0, 1], 2, 1).is_ok());
        assert!(TrainingSet::new(&x, &[0, 0], 2, 1).is_err());
        assert!(TrainingSet::new(&x, &[0], 1, 1).is_err());
        assert!(TrainingSet::new(&x, &[0, 2], 2, 1).is_err());
        assert!(TrainingSet::new(&x, &[0, 1], 2, 0).is_err());
        assert!(TrainSettings { tol: 0.0, ..Default::default() }.validate().is_err());
    }
}
