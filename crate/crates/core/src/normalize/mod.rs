//! Word-level normalizers applied to cleaned text.

mod lemma;
mod porter;

use std::str::FromStr;
use std::sync::Arc;

pub use lemma::{lemmatize, pos_tag, LemmaLexicon, PosTag, SuffixRule};
pub use porter::porter_stem;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormalizerMode {
    #[default]
    None,
    Stem,
    Lemmatize,
}

impl NormalizerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormalizerMode::None => "none",
            NormalizerMode::Stem => "stem",
            NormalizerMode::Lemmatize => "lemma",
        }
    }
}

impl FromStr for NormalizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NormalizerMode::None),
            "stem" => Ok(NormalizerMode::Stem),
            "lemma" | "lemmatize" => Ok(NormalizerMode::Lemmatize),
            other => Err(Error::invalid(format!("unknown normalizer {other:?}"))),
        }
    }
}

impl std::fmt::Display for NormalizerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A normalizer mode bound to the lexicon it lemmatizes with.
#[derive(Debug, Clone)]
pub struct Normalizer {
    mode: NormalizerMode,
    lexicon: Arc<LemmaLexicon>,
}

impl Normalizer {
    pub fn new(mode: NormalizerMode) -> Self {
        Normalizer {
            mode,
            lexicon: LemmaLexicon::bundled(),
        }
    }

    pub fn with_lexicon(mode: NormalizerMode, lexicon: Arc<LemmaLexicon>) -> Self {
        Normalizer { mode, lexicon }
    }

    pub fn mode(&self) -> NormalizerMode {
        self.mode
    }

    /// Splits on whitespace, normalizes each token, and rejoins with single spaces.
    pub fn apply(&self, text: &str) -> String {
        match self.mode {
            NormalizerMode::None => text.to_owned(),
            NormalizerMode::Stem => join(text.split_whitespace().map(porter_stem)),
            NormalizerMode::Lemmatize => {
                let tokens: Vec<&str> = text.split_whitespace().collect();
                let tags = pos_tag(&tokens);
                join(
                    tokens
                        .iter()
                        .zip(tags)
                        .map(|(tok, tag)| self.lexicon.lemmatize(tok, tag)),
                )
            }
        }
    }
}

fn join(tokens: impl Iterator<Item = String>) -> String {
    let mut out = String::new();
    for (i, t) in tokens.enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t);
    }
    out
}

/// [`Normalizer::apply`] with the bundled lexicon.
pub fn normalize_text(text: &str, mode: NormalizerMode) -> String {
    Normalizer::new(mode).apply(text)
}
