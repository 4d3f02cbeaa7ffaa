//! A trained text classifier: normalizer, featurizer, optional idf and model,
//! plus on-disk persistence as a model file with sidecars.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelId, LabelIndex, LabeledExample};
use crate::error::{Error, Result};
use crate::features::{build_vocabulary, fit_idf, Featurizer, HashedSpace, IdfTable, NGramSpec, SparseVector, Vocabulary};
use crate::models::{load_model, save_model, Model, ModelKind, TrainSettings, TrainingSet};
use crate::normalize::{Normalizer, NormalizerMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Weighting {
    Fc,
    Tfidf,
}

impl Weighting {
    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::Fc => "fc",
            Weighting::Tfidf => "tfidf",
        }
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fc" => Ok(Weighting::Fc),
            "tfidf" => Ok(Weighting::Tfidf),
            other => Err(Error::invalid(format!("unknown weighting {other:?}"))),
        }
    }
}

/// How text becomes a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureConfig {
    pub spec: NGramSpec,
    pub weighting: Weighting,
    pub normalizer: NormalizerMode,
    pub min_df: u32,
    /// Feature hashing onto `2^bits` buckets instead of a vocabulary.
    pub hash_bits: Option<u32>,
}

impl FeatureConfig {
    pub fn new(spec: NGramSpec, weighting: Weighting) -> Self {
        FeatureConfig {
            spec,
            weighting,
            normalizer: NormalizerMode::None,
            min_df: 1,
            hash_bits: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TextClassifier {
    pub features: FeatureConfig,
    pub featurizer: Featurizer,
    pub idf: Option<IdfTable>,
    pub model: Model,
    /// Label name of each model class.
    pub labels: Vec<String>,
    /// Label id (in the training [`LabelIndex`]) of each model class.
    pub label_ids: Vec<LabelId>,
    /// Hashtags stripped from raw input before cleaning.
    pub strip_labels: LabelIndex,
    /// Documents the featurizer was fitted on.
    pub n_docs: usize,
    normalizer: Normalizer,
}

impl TextClassifier {
    /// Fits featurizer, idf and model on `train` (already cleaned). Only
    /// labels that occur as training labels become model classes.
    pub fn fit(
        train: &[LabeledExample],
        index: &LabelIndex,
        features: &FeatureConfig,
        kind: ModelKind,
        settings: &TrainSettings,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("no training examples".into()));
        }
        let normalizer = Normalizer::new(features.normalizer);
        let texts: Vec<String> = train.iter().map(|ex| normalizer.apply(&ex.text)).collect();
        let featurizer = match features.hash_bits {
            Some(bits) => Featurizer::Hashed(HashedSpace::new(features.spec, bits)?),
            None => Featurizer::Vocabulary(build_vocabulary(&texts, &features.spec, features.min_df)?),
        };
        let counts: Vec<SparseVector> = texts.iter().map(|t| featurizer.counts(t)).collect();
        let idf = match features.weighting {
            Weighting::Fc => None,
            Weighting::Tfidf => Some(fit_idf(&counts, featurizer.dim())),
        };
        let x = match &idf {
            None => counts,
            Some(idf) => counts.iter().map(|c| idf.transform(c)).collect(),
        };

        let mut label_ids: Vec<LabelId> = train.iter().map(|ex| ex.train_label).collect();
        label_ids.sort_unstable();
        label_ids.dedup();
        let y: Vec<usize> = train
            .iter()
            .map(|ex| label_ids.binary_search(&ex.train_label).unwrap())
            .collect();
        let data = TrainingSet::new(&x, &y, label_ids.len(), featurizer.dim())?;
        let model = Model::fit(kind, &data, settings)?;
        Ok(TextClassifier {
            features: *features,
            featurizer,
            idf,
            model,
            labels: label_ids.iter().map(|&id| index.label(id).to_owned()).collect(),
            label_ids,
            strip_labels: index.clone(),
            n_docs: train.len(),
            normalizer,
        })
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        match &self.featurizer {
            Featurizer::Vocabulary(v) => Some(v),
            Featurizer::Hashed(_) => None,
        }
    }

    /// Feature vector of already-cleaned text.
    pub fn vectorize(&self, cleaned: &str) -> SparseVector {
        let counts = self.featurizer.counts(&self.normalizer.apply(cleaned));
        match &self.idf {
            None => counts,
            Some(idf) => idf.transform(&counts),
        }
    }

    /// Label id of the best class for already-cleaned text.
    pub fn predict(&self, cleaned: &str) -> LabelId {
        self.label_ids[self.model.predict(&self.vectorize(cleaned)).class]
    }

    /// All classes as `(label, score)`, best first; ties keep class order.
    pub fn rank(&self, cleaned: &str) -> Vec<(&str, f64)> {
        let scores = self.model.predict(&self.vectorize(cleaned)).scores;
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        order.into_iter().map(|c| (self.labels[c].as_str(), scores[c])).collect()
    }

    /// Raw tweet text → ranking, applying hashtag stripping and cleaning first.
    pub fn rank_raw(&self, raw: &str) -> Vec<(&str, f64)> {
        self.rank(&crate::cleaning::clean_tweet(raw, &self.strip_labels))
    }

    /// Writes `path` (binary model) plus `path.json`, and `path.vocab.csv` /
    /// `path.idf.csv` when present.
    pub fn save(&self, path: &Path) -> Result<()> {
        save_model(path, &self.model)?;
        if let Some(v) = self.vocabulary() {
            v.save_csv(&sidecar(path, "vocab.csv"))?;
        }
        if let Some(idf) = &self.idf {
            idf.save_csv(&sidecar(path, "idf.csv"))?;
        }
        let manifest = Manifest {
            format: MANIFEST_FORMAT,
            model: self.model.kind().as_str().to_owned(),
            ngram: self.features.spec.to_string(),
            weighting: self.features.weighting.as_str().to_owned(),
            normalizer: self.features.normalizer.as_str().to_owned(),
            min_df: self.features.min_df,
            hash_bits: self.features.hash_bits,
            n_docs: self.n_docs,
            n_features: self.featurizer.dim(),
            labels: self.labels.clone(),
            strip_labels: self.strip_labels.labels().to_vec(),
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        let mpath = sidecar(path, "json");
        std::fs::write(&mpath, json + "\n").map_err(|e| Error::io(&mpath, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mpath = sidecar(path, "json");
        let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::invalid(format!("unsupported manifest format {}", m.format)));
        }
        let spec: NGramSpec = m.ngram.parse()?;
        let features = FeatureConfig {
            spec,
            weighting: m.weighting.parse()?,
            normalizer: m.normalizer.parse()?,
            min_df: m.min_df,
            hash_bits: m.hash_bits,
        };
        let featurizer = match m.hash_bits {
            Some(bits) => Featurizer::Hashed(HashedSpace::new(spec, bits)?),
            None => Featurizer::Vocabulary(Vocabulary::load_csv(
                &sidecar(path, "vocab.csv"),
                spec,
                m.n_docs,
                m.min_df,
            )?),
        };
        let idf = match features.weighting {
            Weighting::Fc => None,
            Weighting::Tfidf => Some(IdfTable::load_csv(&sidecar(path, "idf.csv"), m.n_docs)?),
        };
        let model = load_model(path)?;
        let dim = featurizer.dim();
        if model.n_features() != dim
            || m.n_features != dim
            || idf.as_ref().is_some_and(|i| i.len() != dim)
            || model.n_classes() != m.labels.len()
            || model.kind() != m.model.parse::<ModelKind>()?
        {
            return Err(Error::invalid(format!(
                "model/vocabulary mismatch: model has {} features and {} classes, vocabulary has {dim} features, manifest lists {} labels",
                model.n_features(),
                model.n_classes(),
                m.labels.len()
            )));
        }
        let strip_labels = LabelIndex::from_counts(m.strip_labels.into_iter().map(|l| (l, 0)).collect());
        Ok(TextClassifier {
            normalizer: Normalizer::new(features.normalizer),
            features,
            featurizer,
            idf,
            model,
            label_ids: (0..m.labels.len()).collect(),
            labels: m.labels,
            strip_labels,
            n_docs: m.n_docs,
        })
    }
}

const MANIFEST_FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: u32,
    model: String,
    ngram: String,
    weighting: String,
    normalizer: String,
    min_df: u32,
    hash_bits: Option<u32>,
    n_docs: usize,
    n_features: usize,
    labels: Vec<String>,
    strip_labels: Vec<String>,
}

/// `model.bin` → `model.bin.<ext>`
pub fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn examples() -> (LabelIndex, Vec<LabeledExample>) {
        let index = LabelIndex::from_counts(vec![("job".into(), 3), ("music".into(), 2), ("rare".into(), 1)]);
        let ex = |text: &str, label: usize| LabeledExample {
            id: text.into(),
            text: text.into(),
            gold_labels: vec![label],
            train_label: label,
        };
        let train = vec![
            ex("we are hiring engineers", 0),
            ex("apply for this job today", 0),
            ex("new song on the radio", 1),
            ex("listen to my new album", 1),
        ];
        (index, train)
    }

    #[test]
    fn fit_predict_save_load() {
        let (index, train) = examples();
        let dir = tempfile::tempdir().unwrap();
        for kind in [ModelKind::Mnb, ModelKind::Svm, ModelKind::Lr] {
            for weighting in [Weighting::Fc, Weighting::Tfidf] {
                let mut fc = FeatureConfig::new(NGramSpec::chars(1, 3).unwrap(), weighting);
                if kind == ModelKind::Lr {
                    fc.hash_bits = Some(8);
                }
                let clf = TextClassifier::fit(&train, &index, &fc, kind, &TrainSettings::default()).unwrap();
                assert_eq!(clf.labels, ["job", "music"]);
                assert_eq!(clf.predict("hiring a new engineer"), 0);
                let path = dir.path().join(format!("{kind}-{}.bin", weighting.as_str()));
                clf.save(&path).unwrap();
                let back = TextClassifier::load(&path).unwrap();
                for t in ["new album", "job", ""] {
                    assert_eq!(back.rank(t), clf.rank(t));
                }
                assert_eq!(back.rank_raw("#job new album").len(), 2);
            }
        }
    }

    #[test]
    fn mismatched_sidecars_rejected() {
        let (index, train) = examples();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.bin");
        let b = dir.path().join("b.bin");
        let fit = |spec: &str| {
            let fc = FeatureConfig::new(spec.parse().unwrap(), Weighting::Fc);
            TextClassifier::fit(&train, &index, &fc, ModelKind::Mnb, &TrainSettings::default()).unwrap()
        };
        fit("char:1,2").save(&a).unwrap();
        fit("word:1,1").save(&b).unwrap();
        std::fs::copy(sidecar(&b, "vocab.csv"), sidecar(&a, "vocab.csv")).unwrap();
        assert!(TextClassifier::load(&a).is_err());
    }
}
