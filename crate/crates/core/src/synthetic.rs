//! Deterministic synthetic tweet corpus.
//!
//! Each class owns a handful of word roots. A tweet carries one to three of
//! its class roots, each inflected and often misspelled, mixed with filler
//! words shared by every class. Exact word forms therefore repeat rarely
//! while the roots' character n-grams stay stable.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Tweet;
use crate::error::{Error, Result};

const CLASSES: [(&str, [&str; 6]); 5] = [
    ("music", ["melod", "guitar", "symphon", "rhythm", "concert", "lyric"]),
    ("job", ["recruit", "employ", "salar", "career", "interview", "resum"]),
    ("travel", ["voyag", "passport", "luggag", "airport", "journey", "touris"]),
    ("tech", ["softwar", "comput", "algorithm", "program", "digit", "network"]),
    ("food", ["recip", "flavor", "delicious", "restaurant", "bakery", "spic"]),
];

const SUFFIXES: [&str; 10] = ["", "s", "ing", "ed", "er", "ers", "y", "ic", "ist", "ful"];

const FILLER: [&str; 48] = [
    "the", "a", "and", "to", "of", "in", "for", "on", "with", "this", "that", "my", "your", "is", "are", "was",
    "so", "just", "today", "now", "new", "best", "great", "love", "check", "out", "get", "time", "day", "week",
    "good", "big", "little", "people", "here", "there", "all", "more", "very", "really", "what", "when", "why",
    "how", "going", "see", "look", "night",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    /// At most 5.
    pub n_classes: usize,
    pub n_docs: usize,
    pub seed: u64,
    /// Chance that a root occurrence gets one random edit.
    pub misspell_rate: f64,
    /// Chance that a tweet also carries one root of another class.
    pub cross_rate: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_classes: 5,
            n_docs: 2000,
            seed: 2017,
            misspell_rate: 0.7,
            cross_rate: 0.25,
        }
    }
}

fn misspell(word: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    if chars.len() < 4 {
        return word.to_owned();
    }
    // Edits keep the first two letters.
    let pos = rng.gen_range(2..chars.len());
    match rng.gen_range(0..4) {
        0 => chars[pos] = rng.gen_range(b'a'..=b'z') as char,
        1 => {
            chars.remove(pos);
        }
        2 => chars.insert(pos, rng.gen_range(b'a'..=b'z') as char),
        _ => {
            if pos + 1 < chars.len() {
                chars.swap(pos, pos + 1);
            } else {
                chars.swap(pos - 1, pos);
            }
        }
    }
    chars.into_iter().collect()
}

fn root_form(root: &str, spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> String {
    let word = format!("{root}{}", SUFFIXES.choose(rng).unwrap());
    if rng.gen_bool(spec.misspell_rate) {
        misspell(&word, rng)
    } else {
        word
    }
}

/// Generates `n_docs` distinct tweets, classes assigned round-robin.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<Tweet>> {
    if spec.n_classes < 2 || spec.n_classes > CLASSES.len() {
        return Err(Error::invalid(format!("n_classes must be in 2..={}", CLASSES.len())));
    }
    if !(0.0..=1.0).contains(&spec.misspell_rate) || !(0.0..=1.0).contains(&spec.cross_rate) {
        return Err(Error::invalid("rates must be in [0,1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(spec.n_docs);
    while out.len() < spec.n_docs {
        let class = out.len() % spec.n_classes;
        let (label, roots) = CLASSES[class];
        let mut words: Vec<String> = (0..rng.gen_range(4..=8))
            .map(|_| FILLER.choose(&mut rng).unwrap().to_string())
            .collect();
        for _ in 0..rng.gen_range(1..=3) {
            words.push(root_form(roots.choose(&mut rng).unwrap(), spec, &mut rng));
        }
        if rng.gen_bool(spec.cross_rate) {
            let other = (class + rng.gen_range(1..spec.n_classes)) % spec.n_classes;
            words.push(root_form(CLASSES[other].1.choose(&mut rng).unwrap(), spec, &mut rng));
        }
        words.shuffle(&mut rng);
        let mut text = words.join(" ");
        if rng.gen_bool(0.3) {
            text.push_str(&format!(" #{label}"));
        }
        if rng.gen_bool(0.1) {
            text = format!("RT {text}");
        }
        if rng.gen_bool(0.1) {
            text.push_str(" https://t.co/x");
        }
        if !seen.insert(text.clone()) {
            continue;
        }
        out.push(Tweet {
            id: format!("s{:05}", out.len()),
            text,
            hashtags: vec![label.to_owned()],
        });
    }
    Ok(out)
}

/// One `{"id","text","hashtags"}` object per line.
pub fn write_jsonl(path: &Path, tweets: &[Tweet]) -> Result<()> {
    let mut buf = Vec::new();
    for t in tweets {
        let rec = serde_json::json!({ "id": t.id, "text": t.text, "hashtags": t.hashtags });
        serde_json::to_writer(&mut buf, &rec)?;
        buf.push(b'\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let spec = SyntheticSpec { n_docs: 200, ..Default::default() };
        let a = generate(&spec).unwrap();
        assert_eq!(a.len(), 200);
        assert_eq!(a, generate(&spec).unwrap());
        let labels: HashSet<_> = a.iter().map(|t| t.hashtags[0].as_str()).collect();
        assert_eq!(labels.len(), 5);
        let texts: HashSet<_> = a.iter().map(|t| t.text.trim()).collect();
        assert_eq!(texts.len(), 200);
    }

    #[test]
    fn bad_specs() {
        assert!(generate(&SyntheticSpec { n_classes: 6, ..Default::default() }).is_err());
        assert!(generate(&SyntheticSpec { misspell_rate: 2.0, ..Default::default() }).is_err());
    }

    #[test]
    fn misspell_keeps_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let w = misspell("guitars", &mut rng);
            assert!(w.starts_with("gu"));
        }
    }
}
