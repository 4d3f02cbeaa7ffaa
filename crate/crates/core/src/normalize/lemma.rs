//! Lexicon-driven lemmatizer with a heuristic part-of-speech tagger.
//!
//! Lookup order: the exception table, then the first suffix rule for the
//! word's part of speech, then the word itself.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, LazyLock};

use crate::error::{Error, Result};

const BUNDLED_EXCEPTIONS: &str = include_str!("../../data/lemma_exceptions.tsv");
const BUNDLED_RULES: &str = include_str!("../../data/lemma_rules.tsv");

static BUNDLED: LazyLock<Arc<LemmaLexicon>> = LazyLock::new(|| {
    Arc::new(LemmaLexicon::parse(BUNDLED_EXCEPTIONS, BUNDLED_RULES).expect("bundled lexicon parses"))
});

/// Shortest stem a suffix rule may leave behind.
const MIN_STEM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Unknown,
}

impl FromStr for PosTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noun" => Ok(PosTag::Noun),
            "verb" => Ok(PosTag::Verb),
            "adj" => Ok(PosTag::Adj),
            "unknown" => Ok(PosTag::Unknown),
            other => Err(Error::invalid(format!("unknown part of speech {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub pos: PosTag,
    pub suffix: String,
    pub replacement: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LemmaLexicon {
    exceptions: HashMap<String, String>,
    rules: Vec<SuffixRule>,
}

fn is_word(s: &str) -> bool {
    s.bytes().all(|b| b.is_ascii_lowercase())
}

impl LemmaLexicon {
    /// The lexicon shipped with the crate.
    pub fn bundled() -> Arc<LemmaLexicon> {
        Arc::clone(&BUNDLED)
    }

    /// Loads `word<TAB>lemma` exceptions and `pos<TAB>suffix<TAB>replacement` rules.
    pub fn load(exceptions: &Path, rules: &Path) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        Self::parse(&read(exceptions)?, &read(rules)?)
    }

    /// Parses the two TSV tables. Blank lines and `#` comments are skipped; a
    /// replacement of `-` means the empty string.
    pub fn parse(exceptions: &str, rules: &str) -> Result<Self> {
        let mut lex = LemmaLexicon::default();
        for (line, fields) in tsv_rows(exceptions) {
            let [word, lemma] = fields[..] else {
                return Err(bad_row(line, "expected word<TAB>lemma"));
            };
            if !is_word(word) || word.is_empty() || !is_word(lemma) || lemma.is_empty() {
                return Err(bad_row(line, "words must be nonempty [a-z]+"));
            }
            lex.exceptions.insert(word.to_owned(), lemma.to_owned());
        }
        for (line, fields) in tsv_rows(rules) {
            let [pos, suffix, replacement] = fields[..] else {
                return Err(bad_row(line, "expected pos<TAB>suffix<TAB>replacement"));
            };
            let pos: PosTag = pos.parse().map_err(|_| bad_row(line, "pos must be noun, verb or adj"))?;
            let replacement = if replacement == "-" { "" } else { replacement };
            if pos == PosTag::Unknown || suffix.is_empty() || !is_word(suffix) || !is_word(replacement) {
                return Err(bad_row(line, "invalid rule"));
            }
            lex.rules.push(SuffixRule {
                pos,
                suffix: suffix.to_owned(),
                replacement: replacement.to_owned(),
            });
        }
        Ok(lex)
    }

    pub fn exceptions(&self) -> &HashMap<String, String> {
        &self.exceptions
    }

    pub fn rules(&self) -> &[SuffixRule] {
        &self.rules
    }

    fn apply_rules(&self, word: &str, pos: PosTag) -> Option<String> {
        self.rules
            .iter()
            .filter(|r| r.pos == pos)
            .find(|r| word.len() >= r.suffix.len() + MIN_STEM && word.ends_with(&r.suffix))
            .map(|r| format!("{}{}", &word[..word.len() - r.suffix.len()], r.replacement))
    }

    pub fn lemmatize(&self, word: &str, pos: PosTag) -> String {
        if !is_word(word) {
            return word.to_owned();
        }
        if let Some(lemma) = self.exceptions.get(word) {
            return lemma.clone();
        }
        let found = match pos {
            PosTag::Unknown => self
                .apply_rules(word, PosTag::Verb)
                .or_else(|| self.apply_rules(word, PosTag::Noun)),
            pos => self.apply_rules(word, pos),
        };
        found.unwrap_or_else(|| word.to_owned())
    }
}

fn tsv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').map(str::trim).collect()))
}

fn bad_row(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_owned(),
    }
}

/// Lemmatizes with the bundled lexicon.
pub fn lemmatize(word: &str, pos: PosTag) -> String {
    BUNDLED.lemmatize(word, pos)
}

const CLOSED_CLASS: &[&str] = &[
    "a", "about", "after", "again", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "but", "by", "can", "could", "did", "do", "does", "down",
    "for", "from", "had", "has", "have", "he", "her", "here", "him", "his", "how", "i", "if", "in",
    "into", "is", "it", "its", "just", "may", "me", "might", "must", "my", "no", "not", "of", "off",
    "on", "only", "or", "our", "out", "over", "shall", "she", "should", "so", "some", "than", "that",
    "the", "their", "them", "then", "there", "these", "they", "this", "those", "thus", "to", "too",
    "up", "us", "very", "was", "we", "were", "what", "when", "where", "which", "who", "whom", "whose",
    "why", "will", "with", "would", "yes", "you", "your",
];

/// Tags tokens: closed-class words and `-ly` adverbs are [`PosTag::Unknown`],
/// `-ing`/`-ed` are verbs, `-s` (but not `-ss`) and everything else nouns.
pub fn pos_tag<S: AsRef<str>>(tokens: &[S]) -> Vec<PosTag> {
    tokens
        .iter()
        .map(|t| {
            let t = t.as_ref();
            if CLOSED_CLASS.binary_search(&t).is_ok() || t.ends_with("ly") {
                PosTag::Unknown
            } else if t.ends_with("ing") || t.ends_with("ed") {
                PosTag::Verb
            } else {
                PosTag::Noun
            }
        })
        .collect()
}
