//! Tweet cleaning.
//!
//! [`clean`] applies a fixed, ordered sequence of text transforms. The order
//! matters: the retweet marker is matched case-sensitively, so it must run
//! before lowercasing, and URL removal must run before punctuation is
//! stripped. The output alphabet is `[a-z0-9 ]`, single-spaced, trimmed, and
//! free of runs of identical characters, which makes [`clean`] idempotent.
//!
//! Label hashtags are removed separately by [`strip_hashtags`], ahead of the
//! cleaning steps.

use std::borrow::Cow;
use std::sync::LazyLock;

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::LabelIndex;

static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#(\w+)").unwrap());
static RETWEET: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?-u:\bRT\b)").unwrap());

/// Hyperlinks: an `http`/`https` scheme, `://`, then everything up to the next whitespace.
pub const URL_PATTERN: &str = r"https?://\S*";

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(URL_PATTERN).unwrap());

/// One cleaning transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// NFKD, drop combining marks and anything else outside ASCII. Non-ASCII
    /// whitespace becomes a space so adjacent words stay apart.
    Transliterate,
    /// Every whitespace character other than a space becomes a space.
    FlattenWhitespace,
    /// Remove the uppercase retweet marker `RT` where it stands as a word.
    RemoveRetweetMarker,
    Lowercase,
    RemoveUrls,
    /// Drop everything outside `[a-z0-9 ]`.
    KeepAlphanumeric,
    /// Runs of two or more spaces become one space.
    CollapseSpaces,
    /// Runs of two or more identical characters become one.
    CollapseRuns,
    Trim,
}

impl Step {
    pub const DEFAULT_ORDER: [Step; 9] = [
        Step::Transliterate,
        Step::FlattenWhitespace,
        Step::RemoveRetweetMarker,
        Step::Lowercase,
        Step::RemoveUrls,
        Step::KeepAlphanumeric,
        Step::CollapseSpaces,
        Step::CollapseRuns,
        Step::Trim,
    ];

    pub fn apply<'a>(self, text: &'a str) -> Cow<'a, str> {
        match self {
            Step::Transliterate => Cow::Owned(transliterate(text)),
            Step::FlattenWhitespace => {
                if text.chars().any(|c| c.is_whitespace() && c != ' ') {
                    Cow::Owned(
                        text.chars()
                            .map(|c| if c.is_whitespace() { ' ' } else { c })
                            .collect(),
                    )
                } else {
                    Cow::Borrowed(text)
                }
            }
            Step::RemoveRetweetMarker => RETWEET.replace_all(text, ""),
            Step::Lowercase => Cow::Owned(text.to_lowercase()),
            Step::RemoveUrls => URL.replace_all(text, ""),
            Step::KeepAlphanumeric => Cow::Owned(
                text.chars()
                    .filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || *c == ' ')
                    .collect(),
            ),
            Step::CollapseSpaces => Cow::Owned(collapse(text, |c| c == ' ')),
            Step::CollapseRuns => Cow::Owned(collapse(text, |_| true)),
            Step::Trim => Cow::Borrowed(text.trim_matches(' ')),
        }
    }
}

/// An ordered list of cleaning steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleaningPipeline {
    steps: Vec<Step>,
}

impl Default for CleaningPipeline {
    fn default() -> Self {
        CleaningPipeline {
            steps: Step::DEFAULT_ORDER.to_vec(),
        }
    }
}

impl CleaningPipeline {
    pub fn new(steps: Vec<Step>) -> Self {
        CleaningPipeline { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn url_pattern(&self) -> &'static str {
        URL_PATTERN
    }

    pub fn apply(&self, text: &str) -> String {
        run_steps(&self.steps, text)
    }
}

/// Runs the default pipeline.
pub fn clean(text: &str) -> String {
    run_steps(&Step::DEFAULT_ORDER, text)
}

fn run_steps(steps: &[Step], text: &str) -> String {
    let mut current = text.to_owned();
    for step in steps {
        let next = match step.apply(&current) {
            Cow::Owned(next) => next,
            Cow::Borrowed(same) if same.len() == current.len() => continue,
            Cow::Borrowed(shorter) => shorter.to_owned(),
        };
        current = next;
    }
    current
}

/// Deletes `#word` tokens whose lowercased word is a selected label.
///
/// Hashtags outside the label set are left alone; their `#` disappears later
/// in [`Step::KeepAlphanumeric`] and the word survives as ordinary text.
pub fn strip_hashtags<'a>(text: &'a str, labels: &LabelIndex) -> Cow<'a, str> {
    HASHTAG.replace_all(text, |caps: &regex::Captures<'_>| {
        let word = caps[1].to_lowercase();
        if labels.contains(&word) {
            String::new()
        } else {
            caps[0].to_owned()
        }
    })
}

/// Label-hashtag stripping followed by [`clean`].
pub fn clean_tweet(text: &str, labels: &LabelIndex) -> String {
    clean(&strip_hashtags(text, labels))
}

fn transliterate(text: &str) -> String {
    text.nfkd()
        .filter_map(|c| {
            if c.is_ascii() {
                Some(c)
            } else if c.is_whitespace() {
                Some(' ')
            } else {
                None
            }
        })
        .collect()
}

fn collapse(text: &str, eligible: impl Fn(char) -> bool) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    for c in text.chars() {
        if prev == Some(c) && eligible(c) {
            continue;
        }
        out.push(c);
        prev = Some(c);
    }
    out
}
