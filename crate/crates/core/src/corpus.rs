//! Tweet ingestion, label selection and the train/test split.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cleaning::clean_tweet;
use crate::error::{Error, Result};

/// Index of a label in a [`LabelIndex`].
pub type LabelId = usize;

/// Number of hashtags kept as class labels unless told otherwise.
pub const DEFAULT_TOP_K: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    /// Lowercase, without `#`, deduplicated, in first-seen order.
    pub hashtags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Tsv,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            "tsv" => Ok(InputFormat::Tsv),
            other => Err(Error::invalid(format!("unknown input format {other:?}"))),
        }
    }
}

#[derive(Deserialize)]
struct JsonTweet {
    id: String,
    text: String,
    hashtags: Vec<String>,
}

/// Result of reading a tweet file: the surviving tweets plus per-line errors.
#[derive(Debug, Default)]
pub struct Ingested {
    pub tweets: Vec<Tweet>,
    pub line_errors: Vec<Error>,
    /// Records dropped for having no hashtag.
    pub dropped_untagged: usize,
    /// Records dropped as repeats of an earlier text.
    pub dropped_duplicates: usize,
}

/// Reads tweets from `path`. An unreadable file is fatal; malformed lines are
/// collected in [`Ingested::line_errors`] and skipped.
pub fn ingest(path: &Path, format: InputFormat) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(BufReader::new(file), format).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn ingest_reader<R: BufRead>(reader: R, format: InputFormat) -> Result<Ingested> {
    let mut out = Ingested::default();
    let mut seen = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io("<input>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let tweet = match parse_record(&line, format) {
            Ok(t) => t,
            Err(message) => {
                out.line_errors.push(Error::Parse {
                    line: line_no,
                    message,
                });
                continue;
            }
        };
        if tweet.hashtags.is_empty() {
            out.dropped_untagged += 1;
            continue;
        }
        if !seen.insert(tweet.text.trim().to_owned()) {
            out.dropped_duplicates += 1;
            continue;
        }
        out.tweets.push(tweet);
    }
    Ok(out)
}

fn parse_record(line: &str, format: InputFormat) -> std::result::Result<Tweet, String> {
    let (id, text, raw_tags): (String, String, Vec<String>) = match format {
        InputFormat::Jsonl => {
            let rec: JsonTweet = serde_json::from_str(line).map_err(|e| e.to_string())?;
            (rec.id, rec.text, rec.hashtags)
        }
        InputFormat::Tsv => {
            let mut fields = line.split('\t');
            let (Some(id), Some(text), Some(tags), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err("expected 3 tab-separated fields".into());
            };
            let tags = if tags.trim().is_empty() {
                Vec::new()
            } else {
                tags.split(',').map(str::to_owned).collect()
            };
            (id.to_owned(), text.to_owned(), tags)
        }
    };
    if id.is_empty() {
        return Err("empty id".into());
    }
    let mut hashtags: Vec<String> = Vec::with_capacity(raw_tags.len());
    for raw in raw_tags {
        let tag = raw.trim().trim_start_matches('#').to_lowercase();
        if tag.is_empty() || tag.contains(|c: char| c.is_whitespace() || c == '#') {
            return Err(format!("invalid hashtag {raw:?}"));
        }
        if !hashtags.contains(&tag) {
            hashtags.push(tag);
        }
    }
    Ok(Tweet { id, text, hashtags })
}

/// The selected class labels, most frequent first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelIndex {
    labels: Vec<String>,
    counts: Vec<u64>,
    ids: HashMap<String, LabelId>,
}

impl LabelIndex {
    /// Builds an index from `(label, count)` pairs, sorting by descending
    /// count with ascending label as the tie-break.
    pub fn from_counts(mut counts: Vec<(String, u64)>) -> Self {
        counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        counts.dedup_by(|a, b| a.0 == b.0);
        let ids = counts
            .iter()
            .enumerate()
            .map(|(i, (l, _))| (l.clone(), i))
            .collect();
        let (labels, counts) = counts.into_iter().unzip();
        LabelIndex {
            labels,
            counts,
            ids,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn label(&self, id: LabelId) -> &str {
        &self.labels[id]
    }

    pub fn id_of(&self, label: &str) -> Option<LabelId> {
        self.ids.get(label).copied()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.ids.contains_key(label)
    }

    /// Writes `label,count` CSV with a header row.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["label", "count"])?;
        for (l, c) in self.labels.iter().zip(&self.counts) {
            w.write_record([l.as_str(), &c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads a file written by [`LabelIndex::save_csv`]. File order is kept.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut labels = Vec::new();
        let mut counts = Vec::new();
        let mut ids = HashMap::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |m: &str| Error::Parse {
                line: i + 2,
                message: m.to_owned(),
            };
            if rec.len() != 2 {
                return Err(bad("expected label,count"));
            }
            let count = rec[1].parse().map_err(|_| bad("count is not an integer"))?;
            if ids.insert(rec[0].to_owned(), labels.len()).is_some() {
                return Err(bad("duplicate label"));
            }
            labels.push(rec[0].to_owned());
            counts.push(count);
        }
        Ok(LabelIndex {
            labels,
            counts,
            ids,
        })
    }
}

/// Picks the `k` most frequent hashtags. Each tweet counts once per distinct hashtag.
pub fn select_labels<'a>(tweets: impl IntoIterator<Item = &'a Tweet>, k: usize) -> Result<LabelIndex> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in tweets {
        for h in &t.hashtags {
            *counts.entry(h.as_str()).or_default() += 1;
        }
    }
    if counts.len() < k {
        warn!(
            "only {} distinct hashtags, fewer than the requested {k}",
            counts.len()
        );
    }
    let mut index = LabelIndex::from_counts(counts.into_iter().map(|(l, c)| (l.to_owned(), c)).collect());
    index.labels.truncate(k);
    index.counts.truncate(k);
    index.ids.retain(|_, id| *id < k);
    Ok(index)
}

/// A tweet whose hashtags intersect the label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTweet {
    pub tweet: Tweet,
    /// Sorted, nonempty.
    pub gold_labels: Vec<LabelId>,
    pub train_label: LabelId,
}

/// Keeps tweets carrying at least one selected label. The training label is
/// the gold label with the highest global count, i.e. the smallest id.
pub fn label_examples(tweets: impl IntoIterator<Item = Tweet>, index: &LabelIndex) -> Vec<LabeledTweet> {
    tweets
        .into_iter()
        .filter_map(|tweet| {
            let mut gold: Vec<LabelId> = tweet.hashtags.iter().filter_map(|h| index.id_of(h)).collect();
            gold.sort_unstable();
            gold.dedup();
            let train_label = *gold.first()?;
            Some(LabeledTweet {
                tweet,
                gold_labels: gold,
                train_label,
            })
        })
        .collect()
}

/// A cleaned, labeled document ready for feature extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub gold_labels: Vec<LabelId>,
    pub train_label: LabelId,
}

impl LabeledExample {
    pub fn from_labeled(t: LabeledTweet, index: &LabelIndex) -> Self {
        LabeledExample {
            text: clean_tweet(&t.tweet.text, index),
            id: t.tweet.id,
            gold_labels: t.gold_labels,
            train_label: t.train_label,
        }
    }
}

/// ingest output → label selection → labeling → cleaning.
pub fn prepare_examples(tweets: Vec<Tweet>, k: usize) -> Result<(LabelIndex, Vec<LabeledExample>)> {
    let index = select_labels(&tweets, k)?;
    let examples = label_examples(tweets, &index)
        .into_iter()
        .map(|t| LabeledExample::from_labeled(t, &index))
        .collect();
    Ok((index, examples))
}

#[derive(Serialize, Deserialize)]
struct ExampleRecord<'a> {
    id: &'a str,
    text: &'a str,
    gold: Vec<&'a str>,
    label: &'a str,
}

pub fn write_examples(path: &Path, examples: &[LabeledExample], index: &LabelIndex) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for ex in examples {
        let rec = ExampleRecord {
            id: &ex.id,
            text: &ex.text,
            gold: ex.gold_labels.iter().map(|&g| index.label(g)).collect(),
            label: index.label(ex.train_label),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_examples(path: &Path, index: &LabelIndex) -> Result<Vec<LabeledExample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: n + 1, message };
        let rec: ExampleRecord<'_> = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let lookup = |l: &str| index.id_of(l).ok_or_else(|| bad(format!("unknown label {l:?}")));
        let mut gold = rec.gold.iter().map(|l| lookup(l)).collect::<Result<Vec<_>>>()?;
        gold.sort_unstable();
        gold.dedup();
        let train_label = lookup(rec.label)?;
        if !gold.contains(&train_label) {
            return Err(bad("training label is not among the gold labels".into()));
        }
        out.push(LabeledExample {
            id: rec.id.to_owned(),
            text: rec.text.to_owned(),
            gold_labels: gold,
            train_label,
        });
    }
    Ok(out)
}

/// Train/test split parameters.
///
/// The shuffle is a Fisher–Yates pass driven by ChaCha8 (`rand_chacha`)
/// seeded through `seed_from_u64(seed)`. Each swap index is drawn from one
/// `next_u64` by rejection sampling (`x % n` after discarding
/// `x < 2^64 mod n`), so the permutation depends only on the ChaCha8 stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
        })
    }

    /// `round(train_fraction * n)`, halves rounded away from zero.
    pub fn train_size(&self, n: usize) -> usize {
        (self.train_fraction * n as f64).round() as usize
    }
}

fn bounded(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    let threshold = n.wrapping_neg() % n;
    loop {
        let x = rng.next_u64();
        if x >= threshold {
            return x % n;
        }
    }
}

/// Shuffles `items` in place, deterministically in `seed`.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..items.len()).rev() {
        let j = bounded(&mut rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

/// Shuffles and splits into `(train, test)`.
pub fn split<T>(mut items: Vec<T>, spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>)> {
    SplitSpec::new(spec.train_fraction, spec.seed)?;
    let n = items.len();
    if n < 2 {
        return Err(Error::invalid(format!("cannot split {n} examples into train and test")));
    }
    let n_train = spec.train_size(n);
    if n_train == 0 || n_train == n {
        return Err(Error::invalid(format!(
            "train fraction {} leaves one side of a {n}-example split empty",
            spec.train_fraction
        )));
    }
    shuffle(&mut items, spec.seed);
    let test = items.split_off(n_train);
    Ok((items, test))
}
