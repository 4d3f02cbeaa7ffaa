//! Accuracy metric and the experiment grid.
//!
//! A grid run writes four CSV files:
//!
//! | file | rows |
//! |------|------|
//! | `grid.csv` | one per config, in config order |
//! | `summary.csv` | best n-gram group per (model, weighting, normalizer) |
//! | `series_individual.csv` | configs with spec `(N,N)` |
//! | `series_combined.csv` | configs with spec `(1,N)` |
//!
//! `grid.csv` columns: `model, weighting, level, lo, hi, normalizer, min_df,
//! hash_bits, c, alpha, max_iters, tol, seed, status, accuracy, n_train,
//! n_test, vocab_size, wall_time_s, note`. `status` is `ok`, `empty_vocab`
//! (no terms survived, predictions come from the class prior alone) or
//! `failed` (accuracy left blank, reason in `note`).

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::corpus::{LabelId, LabelIndex, LabeledExample, SplitSpec};
use crate::error::{Error, Result};
use crate::features::{Level, NGramSpec};
use crate::models::{ModelKind, TrainSettings};
use crate::normalize::NormalizerMode;
use crate::pipeline::{FeatureConfig, TextClassifier, Weighting};

/// Fraction of examples whose prediction is any one of their gold labels.
pub fn accuracy(predictions: &[LabelId], gold: &[Vec<LabelId>]) -> Result<f64> {
    if predictions.len() != gold.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} gold sets",
            predictions.len(),
            gold.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Empty("no predictions to score".into()));
    }
    let mut hits = 0usize;
    for (i, (p, g)) in predictions.iter().zip(gold).enumerate() {
        if g.is_empty() {
            return Err(Error::invalid(format!("empty gold set at position {i}")));
        }
        if g.contains(p) {
            hits += 1;
        }
    }
    Ok(hits as f64 / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub features: FeatureConfig,
    pub train_settings: TrainSettings,
}

impl ExperimentConfig {
    pub fn new(model: ModelKind, weighting: Weighting, spec: NGramSpec) -> Self {
        ExperimentConfig {
            model,
            features: FeatureConfig::new(spec, weighting),
            train_settings: TrainSettings::default(),
        }
    }

    pub fn spec(&self) -> NGramSpec {
        self.features.spec
    }

    /// e.g. `SVM-TFIDF` or `MNB-FC-Stemmed`.
    pub fn label(&self) -> String {
        let mut s = format!(
            "{}-{}",
            self.model.as_str().to_uppercase(),
            self.features.weighting.as_str().to_uppercase()
        );
        match self.features.normalizer {
            NormalizerMode::None => {}
            NormalizerMode::Stem => s.push_str("-Stemmed"),
            NormalizerMode::Lemmatize => s.push_str("-Lemmatized"),
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    EmptyVocabulary,
    Failed(String),
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::EmptyVocabulary => "empty_vocab",
            RunStatus::Failed(_) => "failed",
        }
    }

    pub fn succeeded(&self) -> bool {
        !matches!(self, RunStatus::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub config: ExperimentConfig,
    pub status: RunStatus,
    /// 0 for failed rows.
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub vocab_size: usize,
    pub wall_time: f64,
}

impl ReportRow {
    fn note(&self) -> String {
        match &self.status {
            RunStatus::Failed(msg) => msg.clone(),
            _ if self.config.features.normalizer != NormalizerMode::None
                && self.config.spec().level() == Level::Char =>
            {
                "normalizer applied before char n-grams".into()
            }
            _ => String::new(),
        }
    }
}

/// Trains on `train`, scores on `test`. Errors only for bad inputs; a
/// training failure is returned as `Err` too and turned into a failed row by
/// [`run_grid`].
pub fn run_experiment(
    config: &ExperimentConfig,
    index: &LabelIndex,
    train: &[LabeledExample],
    test: &[LabeledExample],
) -> Result<ReportRow> {
    let start = Instant::now();
    if config.features.normalizer != NormalizerMode::None && config.spec().level() == Level::Char {
        log::warn!("{}: normalizer {} applied before char n-grams", config.label(), config.features.normalizer);
    }
    let clf = TextClassifier::fit(train, index, &config.features, config.model, &config.train_settings)?;
    let predictions: Vec<LabelId> = test.iter().map(|ex| clf.predict(&ex.text)).collect();
    let gold: Vec<Vec<LabelId>> = test.iter().map(|ex| ex.gold_labels.clone()).collect();
    let acc = accuracy(&predictions, &gold)?;
    let vocab_size = clf.featurizer.dim();
    let status = match clf.vocabulary() {
        Some(v) if v.is_empty() => RunStatus::EmptyVocabulary,
        _ => RunStatus::Ok,
    };
    Ok(ReportRow {
        config: *config,
        status,
        accuracy: acc,
        n_train: train.len(),
        n_test: test.len(),
        vocab_size,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Runs every config on a pool of `jobs` threads (0 = rayon default). Rows
/// come back in config order; a failing or panicking cell becomes a
/// `failed` row.
pub fn run_grid(
    configs: &[ExperimentConfig],
    index: &LabelIndex,
    train: &[LabeledExample],
    test: &[LabeledExample],
    jobs: usize,
) -> Result<Vec<ReportRow>> {
    if configs.is_empty() {
        return Err(Error::Empty("experiment grid has no configs".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        configs
            .par_iter()
            .map(|config| {
                let start = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| run_experiment(config, index, train, test)));
                let reason = match outcome {
                    Ok(Ok(row)) => {
                        log::info!("{} {}: {:.4}", config.label(), config.spec(), row.accuracy);
                        return row;
                    }
                    Ok(Err(e)) => e.to_string(),
                    Err(panic) => panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "panic".into()),
                };
                log::warn!("{} {} failed: {reason}", config.label(), config.spec());
                ReportRow {
                    config: *config,
                    status: RunStatus::Failed(reason),
                    accuracy: 0.0,
                    n_train: train.len(),
                    n_test: test.len(),
                    vocab_size: 0,
                    wall_time: start.elapsed().as_secs_f64(),
                }
            })
            .collect()
    });
    Ok(rows)
}

/// Best row of one (model, weighting, normalizer) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub weighting: Weighting,
    pub normalizer: NormalizerMode,
    pub label: String,
    pub spec: NGramSpec,
    pub accuracy: f64,
    pub n_configs: usize,
}

/// Max-accuracy successful row per group, groups in order of first
/// appearance, ties to the earlier row.
pub fn summarize(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for row in rows.iter().filter(|r| r.status.succeeded()) {
        let c = &row.config;
        let slot = out.iter_mut().find(|s| {
            s.model == c.model && s.weighting == c.features.weighting && s.normalizer == c.features.normalizer
        });
        match slot {
            Some(s) => {
                s.n_configs += 1;
                if row.accuracy > s.accuracy {
                    s.spec = c.spec();
                    s.accuracy = row.accuracy;
                }
            }
            None => out.push(SummaryRow {
                model: c.model,
                weighting: c.features.weighting,
                normalizer: c.features.normalizer,
                label: c.label(),
                spec: c.spec(),
                accuracy: row.accuracy,
                n_configs: 1,
            }),
        }
    }
    out
}

/// `char(1,7)`
pub fn group_name(spec: &NGramSpec) -> String {
    format!("{}({},{})", spec.level().as_str(), spec.lo(), spec.hi())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::invalid(format!("{}: {other:?}", path.display())),
    })
}

fn accuracy_cell(row: &ReportRow) -> String {
    if row.status.succeeded() {
        row.accuracy.to_string()
    } else {
        String::new()
    }
}

pub fn write_grid_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "model", "weighting", "level", "lo", "hi", "normalizer", "min_df", "hash_bits", "c", "alpha", "max_iters",
        "tol", "seed", "status", "accuracy", "n_train", "n_test", "vocab_size", "wall_time_s", "note",
    ])?;
    for row in rows {
        let c = &row.config;
        let s = &c.train_settings;
        w.write_record([
            c.model.as_str().to_owned(),
            c.features.weighting.as_str().to_owned(),
            c.spec().level().as_str().to_owned(),
            c.spec().lo().to_string(),
            c.spec().hi().to_string(),
            c.features.normalizer.as_str().to_owned(),
            c.features.min_df.to_string(),
            c.features.hash_bits.map(|b| b.to_string()).unwrap_or_default(),
            s.c_reg.to_string(),
            s.alpha.to_string(),
            s.max_iters.to_string(),
            s.tol.to_string(),
            s.seed.to_string(),
            row.status.as_str().to_owned(),
            accuracy_cell(row),
            row.n_train.to_string(),
            row.n_test.to_string(),
            row.vocab_size.to_string(),
            format!("{:.3}", row.wall_time),
            row.note(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary_csv(path: &Path, summary: &[SummaryRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["label", "ngram_group", "accuracy", "model", "weighting", "normalizer", "n_configs"])?;
    for s in summary {
        w.write_record([
            s.label.clone(),
            group_name(&s.spec),
            s.accuracy.to_string(),
            s.model.as_str().to_owned(),
            s.weighting.as_str().to_owned(),
            s.normalizer.as_str().to_owned(),
            s.n_configs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Tidy `(N, accuracy)` series; `individual` selects `(N,N)` rows, otherwise
/// `(1,N)` rows. `(1,1)` belongs to both.
pub fn write_series_csv(path: &Path, rows: &[ReportRow], individual: bool) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["series", "model", "weighting", "level", "normalizer", "n", "accuracy", "status"])?;
    for row in rows {
        let spec = row.config.spec();
        let keep = if individual { spec.is_individual() } else { spec.is_combined() };
        if !keep {
            continue;
        }
        let c = &row.config;
        w.write_record([
            format!("{}-{}", c.label(), spec.level().as_str()),
            c.model.as_str().to_owned(),
            c.features.weighting.as_str().to_owned(),
            spec.level().as_str().to_owned(),
            c.features.normalizer.as_str().to_owned(),
            spec.hi().to_string(),
            accuracy_cell(row),
            row.status.as_str().to_owned(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads rows back from a `grid.csv` written by [`write_grid_csv`].
pub fn read_grid_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::invalid(format!("{}: {other:?}", path.display())),
    })?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid(format!("{}: missing column {name}", path.display())))
    };
    let names = [
        "model", "weighting", "level", "lo", "hi", "normalizer", "min_df", "hash_bits", "c", "alpha", "max_iters",
        "tol", "seed", "status", "accuracy", "n_train", "n_test", "vocab_size", "wall_time_s", "note",
    ];
    let idx: Vec<usize> = names.iter().map(|n| col(n)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |k: usize| rec.get(idx[k]).unwrap_or("");
        let bad = |what: &str| Error::Parse { line, message: format!("bad {what} {:?}", get(names.iter().position(|n| *n == what).unwrap())) };
        fn num<T: std::str::FromStr>(s: &str, err: impl FnOnce() -> Error) -> Result<T> {
            s.parse().map_err(|_| err())
        }
        let spec = NGramSpec::new(get(2).parse()?, num(get(3), || bad("lo"))?, num(get(4), || bad("hi"))?)?;
        let mut config = ExperimentConfig::new(get(0).parse()?, get(1).parse()?, spec);
        config.features.normalizer = get(5).parse()?;
        config.features.min_df = num(get(6), || bad("min_df"))?;
        config.features.hash_bits = match get(7) {
            "" => None,
            s => Some(num(s, || bad("hash_bits"))?),
        };
        config.train_settings = TrainSettings {
            c_reg: num(get(8), || bad("c"))?,
            alpha: num(get(9), || bad("alpha"))?,
            max_iters: num(get(10), || bad("max_iters"))?,
            tol: num(get(11), || bad("tol"))?,
            seed: num(get(12), || bad("seed"))?,
        };
        let status = match get(13) {
            "ok" => RunStatus::Ok,
            "empty_vocab" => RunStatus::EmptyVocabulary,
            "failed" => RunStatus::Failed(get(19).to_owned()),
            _ => return Err(bad("status")),
        };
        let accuracy = if status.succeeded() { num(get(14), || bad("accuracy"))? } else { 0.0 };
        rows.push(ReportRow {
            config,
            status,
            accuracy,
            n_train: num(get(15), || bad("n_train"))?,
            n_test: num(get(16), || bad("n_test"))?,
            vocab_size: num(get(17), || bad("vocab_size"))?,
            wall_time: num(get(18), || bad("wall_time_s"))?,
        });
    }
    Ok(rows)
}

pub const GRID_FILES: [&str; 4] = ["grid.csv", "summary.csv", "series_individual.csv", "series_combined.csv"];

/// Writes all four report files into `dir` (created if missing).
pub fn write_reports(dir: &Path, rows: &[ReportRow]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_grid_csv(&dir.join(GRID_FILES[0]), rows)?;
    write_summary_csv(&dir.join(GRID_FILES[1]), &summarize(rows))?;
    write_series_csv(&dir.join(GRID_FILES[2]), rows, true)?;
    write_series_csv(&dir.join(GRID_FILES[3]), rows, false)
}

/// `(N,N)` for N in 1..=max_n.
pub fn individual_specs(level: Level, max_n: usize) -> Vec<NGramSpec> {
    (1..=max_n).map(|n| NGramSpec::new(level, n, n).unwrap()).collect()
}

/// `(1,N)` for N in 1..=max_n.
pub fn combined_specs(level: Level, max_n: usize) -> Vec<NGramSpec> {
    (1..=max_n).map(|n| NGramSpec::new(level, 1, n).unwrap()).collect()
}

pub const PAPER_GRID: &str = include_str!("../data/paper_grid.toml");

/// A grid file: sweeps plus shared settings.
///
/// ```toml
/// preset = "paper_grid"      # optional, sweeps are appended after it
/// c = 1.0
/// [[sweep]]
/// models = ["svm"]
/// weightings = ["tfidf"]
/// level = "char"
/// max_n = 4
/// groups = ["combined"]      # default: both
/// normalizers = ["none"]     # default
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub preset: Option<String>,
    #[serde(default)]
    pub sweep: Vec<Sweep>,
    pub min_df: Option<u32>,
    pub hash_dim: Option<u32>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub split_seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub models: Vec<String>,
    pub weightings: Vec<String>,
    pub level: String,
    pub max_n: usize,
    #[serde(default = "default_groups")]
    pub groups: Vec<String>,
    #[serde(default = "default_normalizers")]
    pub normalizers: Vec<String>,
}

fn default_groups() -> Vec<String> {
    vec!["individual".into(), "combined".into()]
}

fn default_normalizers() -> Vec<String> {
    vec!["none".into()]
}

/// Expanded grid: configs in run order and the split to evaluate on.
#[derive(Debug, Clone)]
pub struct Grid {
    pub configs: Vec<ExperimentConfig>,
    pub split: SplitSpec,
}

impl GridFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("grid file: {e}")))
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper_grid" => Self::parse(PAPER_GRID),
            other => Err(Error::invalid(format!("unknown grid preset {other:?}"))),
        }
    }

    /// Expands sweeps model-major, then weighting, normalizer, group, N.
    /// Repeated configs (e.g. `(1,1)` in both groups) run once.
    pub fn expand(&self) -> Result<Grid> {
        let mut sweeps = Vec::new();
        if let Some(p) = &self.preset {
            let preset = Self::preset(p)?;
            if preset.preset.is_some() {
                return Err(Error::invalid("presets cannot nest"));
            }
            sweeps.extend(preset.sweep);
        }
        sweeps.extend(self.sweep.iter().cloned());

        let mut settings = TrainSettings::default();
        if let Some(c) = self.c {
            settings.c_reg = c;
        }
        if let Some(a) = self.alpha {
            settings.alpha = a;
        }
        if let Some(m) = self.max_iters {
            settings.max_iters = m;
        }
        if let Some(t) = self.tol {
            settings.tol = t;
        }
        if let Some(s) = self.seed {
            settings.seed = s;
        }
        settings.validate()?;

        let mut configs = Vec::new();
        let mut seen = HashSet::new();
        for sw in &sweeps {
            let level: Level = sw.level.parse()?;
            if sw.max_n == 0 {
                return Err(Error::invalid("max_n must be at least 1"));
            }
            for m in &sw.models {
                let model: ModelKind = m.parse()?;
                for wt in &sw.weightings {
                    let weighting: Weighting = wt.parse()?;
                    for nm in &sw.normalizers {
                        let normalizer: NormalizerMode = nm.parse()?;
                        for g in &sw.groups {
                            let specs = match g.as_str() {
                                "individual" => individual_specs(level, sw.max_n),
                                "combined" => combined_specs(level, sw.max_n),
                                other => return Err(Error::invalid(format!("unknown n-gram group {other:?}"))),
                            };
                            for spec in specs {
                                let mut cfg = ExperimentConfig::new(model, weighting, spec);
                                cfg.features.normalizer = normalizer;
                                cfg.features.min_df = self.min_df.unwrap_or(1);
                                cfg.features.hash_bits = self.hash_dim;
                                cfg.train_settings = settings;
                                if seen.insert((model, weighting, normalizer, spec)) {
                                    configs.push(cfg);
                                }
                            }
                        }
                    }
                }
            }
        }
        if configs.is_empty() {
            return Err(Error::Empty("grid file defines no configs".into()));
        }
        let split = SplitSpec::new(self.train_fraction.unwrap_or(0.7), self.split_seed.unwrap_or(0))?;
        Ok(Grid { configs, split })
    }
}
