//! `microtext` command-line tool.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::ffi::OsString;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use microtext::cleaning::{clean, clean_tweet};
use microtext::corpus::{
    ingest, prepare_examples, read_examples, split, write_examples, InputFormat, LabelIndex, LabeledExample,
    SplitSpec, DEFAULT_TOP_K,
};
use microtext::eval::{accuracy, read_grid_csv, run_grid, summarize, write_reports, GridFile};
use microtext::features::NGramSpec;
use microtext::models::{ModelKind, TrainSettings};
use microtext::normalize::NormalizerMode;
use microtext::pipeline::{FeatureConfig, TextClassifier, Weighting};
use microtext::synthetic::{generate, write_jsonl, SyntheticSpec};

const EXAMPLES_FILE: &str = "examples.jsonl";
const LABELS_FILE: &str = "labels.csv";

#[derive(Parser, Debug)]
#[command(name = "microtext", version, about = "Hashtag classification for tweets")]
#[command(args_override_self = true)]
struct Cli {
    /// TOML file with one table per subcommand, e.g. `[train] model = "svm"`.
    /// Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read raw tweets, select the top-k hashtags and write cleaned, labeled examples.
    Ingest(IngestArgs),
    /// Clean text from stdin, one line at a time.
    Clean(CleanArgs),
    /// Train a classifier on the training split of a data directory.
    Train(TrainArgs),
    /// Print the top labels for each input line.
    Predict(PredictArgs),
    /// Run an experiment grid and write the report CSVs.
    Experiment(ExperimentArgs),
    /// Print the best n-gram group per model/weighting/normalizer from a grid.csv.
    Report(ReportArgs),
    /// Write the synthetic tweet corpus.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "jsonl")]
    format: InputFormat,
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CleanArgs {
    /// labels.csv whose hashtags are removed before cleaning.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Directory written by `ingest`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "svm")]
    model: ModelKind,
    #[arg(long, default_value = "tfidf")]
    weighting: Weighting,
    /// LEVEL:LO,HI, e.g. char:1,7 or word:1,2.
    #[arg(long, default_value = "char:1,7")]
    ngram: NGramSpec,
    #[arg(long, default_value = "none")]
    normalizer: NormalizerMode,
    /// Seeds both the train/test split and the solver.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    min_df: u32,
    /// Hash features into 2^BITS buckets instead of building a vocabulary.
    #[arg(long, value_name = "BITS")]
    hash_dim: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Text file, one tweet per line; `-` reads stdin.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    top: usize,
    /// Append the score after each label.
    #[arg(long)]
    scores: bool,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    data: PathBuf,
    /// Grid TOML file.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    grid: Option<PathBuf>,
    /// Built-in grid, e.g. paper_grid.
    #[arg(long)]
    preset: Option<String>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory holding grid.csv.
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    docs: usize,
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = SyntheticSpec::default().seed)]
    seed: u64,
}

/// Errors that should exit with status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MICROTEXT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match parse_args(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => return report_error(e),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(e),
    }
}

fn report_error(e: anyhow::Error) -> ExitCode {
    if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
        let _ = clap_err.print();
        return ExitCode::from(clap_err.exit_code() as u8);
    }
    eprintln!("error: {e:#}");
    if e.downcast_ref::<UsageError>().is_some() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

/// Parses argv, splicing in flags from `--config` ahead of the user's own
/// subcommand flags so the latter override them.
fn parse_args(argv: Vec<OsString>) -> anyhow::Result<Cli> {
    let cli = Cli::try_parse_from(&argv)?;
    let Some(path) = &cli.config else {
        return Ok(cli);
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let sub = subcommand_name(&cli.command);
    for (key, value) in &table {
        if !value.is_table() || !SUBCOMMANDS.contains(&key.as_str()) {
            return Err(usage(format!("{}: unknown section {key:?}", path.display())));
        }
    }
    let Some(section) = table.get(sub).and_then(|v| v.as_table()) else {
        return Ok(cli);
    };
    let mut extra = Vec::new();
    for (key, value) in section {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => extra.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => extra.extend([flag, s.clone()]),
            toml::Value::Integer(i) => extra.extend([flag, i.to_string()]),
            toml::Value::Float(f) => extra.extend([flag, f.to_string()]),
            _ => return Err(usage(format!("{}: unsupported value for {key}", path.display()))),
        }
    }
    let pos = argv
        .iter()
        .position(|a| a.to_str() == Some(sub))
        .ok_or_else(|| usage("cannot locate subcommand"))?;
    let mut merged: Vec<OsString> = argv[..=pos].to_vec();
    merged.extend(extra.into_iter().map(OsString::from));
    merged.extend_from_slice(&argv[pos + 1..]);
    Ok(Cli::try_parse_from(merged)?)
}

const SUBCOMMANDS: [&str; 7] = ["ingest", "clean", "train", "predict", "experiment", "report", "synth"];

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Clean(_) => "clean",
        Command::Train(_) => "train",
        Command::Predict(_) => "predict",
        Command::Experiment(_) => "experiment",
        Command::Report(_) => "report",
        Command::Synth(_) => "synth",
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Clean(a) => cmd_clean(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Report(a) => cmd_report(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn cmd_ingest(a: IngestArgs) -> anyhow::Result<()> {
    if a.top_k == 0 {
        return Err(usage("--top-k must be at least 1"));
    }
    let ingested = ingest(&a.input, a.format)?;
    for e in &ingested.line_errors {
        log::warn!("{}: skipped {e}", a.input.display());
    }
    log::info!(
        "{} tweets kept, {} without hashtags, {} duplicates",
        ingested.tweets.len(),
        ingested.dropped_untagged,
        ingested.dropped_duplicates
    );
    if ingested.tweets.is_empty() {
        bail!("{}: no usable tweets", a.input.display());
    }
    let (index, examples) = prepare_examples(ingested.tweets, a.top_k)?;
    if examples.is_empty() {
        bail!("no tweet carries one of the selected hashtags");
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    index.save_csv(&a.out.join(LABELS_FILE))?;
    write_examples(&a.out.join(EXAMPLES_FILE), &examples, &index)?;
    eprintln!("{} examples, {} labels", examples.len(), index.len());
    Ok(())
}

fn cmd_clean(a: CleanArgs) -> anyhow::Result<()> {
    let labels = a.labels.as_deref().map(LabelIndex::load_csv).transpose()?;
    let stdin = std::io::stdin();
    let mut out = BufWriter::new(std::io::stdout().lock());
    for line in stdin.lock().lines() {
        let line = line.context("reading stdin")?;
        let cleaned = match &labels {
            Some(l) => clean_tweet(&line, l),
            None => clean(&line),
        };
        writeln!(out, "{cleaned}")?;
    }
    out.flush()?;
    Ok(())
}

fn load_data(dir: &Path) -> anyhow::Result<(LabelIndex, Vec<LabeledExample>)> {
    let index = LabelIndex::load_csv(&dir.join(LABELS_FILE))?;
    let examples = read_examples(&dir.join(EXAMPLES_FILE), &index)?;
    Ok((index, examples))
}

fn cmd_train(a: TrainArgs) -> anyhow::Result<()> {
    let split_spec = SplitSpec::new(a.train_fraction, a.seed).map_err(|e| usage(e.to_string()))?;
    let settings = TrainSettings {
        c_reg: a.c,
        alpha: a.alpha,
        max_iters: a.max_iters,
        tol: a.tol,
        seed: a.seed,
    };
    settings.validate().map_err(|e| usage(e.to_string()))?;
    let features = FeatureConfig {
        spec: a.ngram,
        weighting: a.weighting,
        normalizer: a.normalizer,
        min_df: a.min_df,
        hash_bits: a.hash_dim,
    };
    let (index, examples) = load_data(&a.data)?;
    let (train, test) = split(examples, &split_spec)?;
    let clf = TextClassifier::fit(&train, &index, &features, a.model, &settings)?;
    clf.save(&a.out)?;
    let preds: Vec<usize> = test.iter().map(|ex| clf.predict(&ex.text)).collect();
    let gold: Vec<Vec<usize>> = test.iter().map(|ex| ex.gold_labels.clone()).collect();
    let acc = accuracy(&preds, &gold)?;
    println!("n_train\t{}\nn_test\t{}\nfeatures\t{}\naccuracy\t{acc}", train.len(), test.len(), clf.featurizer.dim());
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> anyhow::Result<()> {
    if a.top == 0 {
        return Err(usage("--top must be at least 1"));
    }
    let clf = TextClassifier::load(&a.model)?;
    let reader: Box<dyn BufRead> = if a.input.as_os_str() == "-" {
        Box::new(std::io::stdin().lock())
    } else {
        let f = std::fs::File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
        Box::new(std::io::BufReader::new(f))
    };
    let mut out = BufWriter::new(std::io::stdout().lock());
    for line in reader.lines() {
        let line = line.context("reading input")?;
        let ranked = clf.rank_raw(&line);
        let cells: Vec<String> = ranked
            .iter()
            .take(a.top)
            .map(|(label, score)| if a.scores { format!("{label}\t{score}") } else { (*label).to_owned() })
            .collect();
        writeln!(out, "{}", cells.join("\t"))?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    let grid_file = match (&a.grid, &a.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read grid file {}: {e}", path.display())))?;
            GridFile::parse(&text).map_err(|e| usage(e.to_string()))?
        }
        (None, Some(name)) => GridFile::preset(name).map_err(|e| usage(e.to_string()))?,
        (None, None) => return Err(usage("--grid or --preset is required")),
    };
    let grid = grid_file.expand().map_err(|e| usage(e.to_string()))?;
    let (index, examples) = load_data(&a.data)?;
    let (train, test) = split(examples, &grid.split)?;
    log::info!("{} configs, {} train / {} test", grid.configs.len(), train.len(), test.len());
    let rows = run_grid(&grid.configs, &index, &train, &test, a.jobs)?;
    write_reports(&a.out, &rows)?;
    let ok = rows.iter().filter(|r| r.status.succeeded()).count();
    eprintln!("{ok}/{} configs succeeded", rows.len());
    if ok == 0 {
        bail!("every grid cell failed");
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> anyhow::Result<()> {
    let rows = read_grid_csv(&a.dir.join("grid.csv"))?;
    let mut out = BufWriter::new(std::io::stdout().lock());
    writeln!(out, "{:<24} {:<14} {}", "model and features", "n-gram group", "accuracy")?;
    for s in summarize(&rows) {
        let group = microtext::eval::group_name(&s.spec);
        writeln!(out, "{:<24} {:<14} {:.3}", s.label, group, s.accuracy)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> anyhow::Result<()> {
    let spec = SyntheticSpec {
        n_classes: a.classes,
        n_docs: a.docs,
        seed: a.seed,
        ..Default::default()
    };
    let tweets = generate(&spec).map_err(|e| usage(e.to_string()))?;
    write_jsonl(&a.out, &tweets)?;
    Ok(())
}
