//! N-gram feature selection and FC / TF-IDF extraction.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Char,
    Word,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Char => "char",
            Level::Word => "word",
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "char" => Ok(Level::Char),
            "word" => Ok(Level::Word),
            other => Err(Error::invalid(format!("unknown n-gram level {other:?}"))),
        }
    }
}

/// All n-grams of one level with `lo <= n <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NGramSpec {
    level: Level,
    lo: usize,
    hi: usize,
}

impl NGramSpec {
    pub fn new(level: Level, lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::invalid(format!("invalid n-gram range ({lo},{hi})")));
        }
        Ok(NGramSpec { level, lo, hi })
    }

    pub fn chars(lo: usize, hi: usize) -> Result<Self> {
        Self::new(Level::Char, lo, hi)
    }

    pub fn words(lo: usize, hi: usize) -> Result<Self> {
        Self::new(Level::Word, lo, hi)
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    /// `(N,N)`
    pub fn is_individual(&self) -> bool {
        self.lo == self.hi
    }

    /// `(1,N)`
    pub fn is_combined(&self) -> bool {
        self.lo == 1
    }
}

/// `level:lo,hi`, e.g. `char:1,7`.
impl FromStr for NGramSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("expected LEVEL:LO,HI (e.g. char:1,7), got {s:?}"));
        let (level, range) = s.split_once(':').ok_or_else(bad)?;
        let (lo, hi) = range.split_once(',').ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        NGramSpec::new(level.trim().parse()?, lo, hi)
    }
}

impl fmt::Display for NGramSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{},{}", self.level.as_str(), self.lo, self.hi)
    }
}

/// Calls `f` once per n-gram occurrence, shortest n first.
///
/// Character n-grams run over Unicode scalar values and include spaces, so
/// they cross word boundaries. Word n-grams are whitespace tokens joined with
/// single spaces.
pub fn for_each_ngram(text: &str, spec: &NGramSpec, mut f: impl FnMut(&str)) {
    match spec.level {
        Level::Char => {
            let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
            bounds.push(text.len());
            let len = bounds.len() - 1;
            for n in spec.lo..=spec.hi.min(len) {
                for start in 0..=len - n {
                    f(&text[bounds[start]..bounds[start + n]]);
                }
            }
        }
        Level::Word => {
            let tokens: Vec<&str> = text.split_whitespace().collect();
            let mut buf = String::new();
            for n in spec.lo..=spec.hi.min(tokens.len()) {
                for window in tokens.windows(n) {
                    buf.clear();
                    for (i, t) in window.iter().enumerate() {
                        if i > 0 {
                            buf.push(' ');
                        }
                        buf.push_str(t);
                    }
                    f(&buf);
                }
            }
        }
    }
}

/// The n-gram multiset of `text`, as a list with repetitions.
pub fn extract_ngrams(text: &str, spec: &NGramSpec) -> Vec<String> {
    let mut out = Vec::new();
    for_each_ngram(text, spec, |g| out.push(g.to_owned()));
    out
}

/// Sparse vector with strictly increasing indices and no zero entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Sums duplicate indices and drops zeros.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_unstable_by_key(|p| p.0);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector { indices, values };
        out.retain_nonzero();
        out
    }

    /// Fails unless `indices` is strictly increasing and the lengths agree.
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sparse indices must be strictly increasing and match values"));
        }
        let mut out = SparseVector { indices, values };
        out.retain_nonzero();
        Ok(out)
    }

    fn retain_nonzero(&mut self) {
        if self.values.iter().any(|&v| v == 0.0) {
            let (i, v) = self
                .indices
                .iter()
                .zip(&self.values)
                .filter(|(_, &v)| v != 0.0)
                .map(|(&i, &v)| (i, v))
                .unzip();
            self.indices = i;
            self.values = v;
        }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| dense[i] * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Highest index plus one, or 0 when empty.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&i| i as usize + 1)
    }
}

/// Term-to-index map learned from a training corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    doc_freq: Vec<u32>,
    n_docs: usize,
    spec: NGramSpec,
    min_df: u32,
}

/// Builds a vocabulary of every n-gram whose document frequency is at least
/// `min_df`. Indices follow lexicographic (byte) order of the terms.
pub fn build_vocabulary<S: AsRef<str> + Sync>(corpus: &[S], spec: &NGramSpec, min_df: u32) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::invalid("min_df must be at least 1"));
    }
    if corpus.is_empty() {
        return Err(Error::Empty("cannot build a vocabulary from an empty corpus".into()));
    }
    let df = corpus
        .par_chunks(256)
        .map(|docs| {
            let mut df: HashMap<String, u32> = HashMap::new();
            let mut seen: HashSet<String> = HashSet::new();
            for doc in docs {
                for_each_ngram(doc.as_ref(), spec, |g| {
                    if !seen.contains(g) {
                        seen.insert(g.to_owned());
                    }
                });
                for g in seen.drain() {
                    *df.entry(g).or_default() += 1;
                }
            }
            df
        })
        .reduce(HashMap::new, |a, b| if a.len() >= b.len() { merge(a, b) } else { merge(b, a) });
    let mut kept: Vec<(String, u32)> = df.into_iter().filter(|(_, d)| *d >= min_df).collect();
    kept.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    Ok(Vocabulary::from_sorted(kept, corpus.len(), *spec, min_df))
}

fn merge(mut a: HashMap<String, u32>, b: HashMap<String, u32>) -> HashMap<String, u32> {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

impl Vocabulary {
    fn from_sorted(kept: Vec<(String, u32)>, n_docs: usize, spec: NGramSpec, min_df: u32) -> Self {
        let index = kept.iter().enumerate().map(|(i, (t, _))| (t.clone(), i as u32)).collect();
        let (terms, doc_freq) = kept.into_iter().unzip();
        Vocabulary {
            terms,
            index,
            doc_freq,
            n_docs,
            spec,
            min_df,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn spec(&self) -> &NGramSpec {
        &self.spec
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn min_df(&self) -> u32 {
        self.min_df
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[u32] {
        &self.doc_freq
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    /// Writes `term,index,df`. Terms containing a comma, space or quote are quoted.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "term,index,df").map_err(io)?;
        for (i, (t, df)) in self.terms.iter().zip(&self.doc_freq).enumerate() {
            writeln!(w, "{},{i},{df}", escape_csv(t)).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Reads a file written by [`Vocabulary::save_csv`]; the remaining fields
    /// come from the model manifest.
    pub fn load_csv(path: &Path, spec: NGramSpec, n_docs: usize, min_df: u32) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::None).from_path(path)?;
        let mut kept: Vec<(String, u32)> = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |m: &str| Error::Parse {
                line: i + 2,
                message: m.to_owned(),
            };
            if rec.len() != 3 {
                return Err(bad("expected term,index,df"));
            }
            let index: usize = rec[1].parse().map_err(|_| bad("bad index"))?;
            if index != i {
                return Err(bad("indices must be 0..V-1 in order"));
            }
            let df: u32 = rec[2].parse().map_err(|_| bad("bad df"))?;
            if let Some((prev, _)) = kept.last() {
                if prev.as_str() >= &rec[0] {
                    return Err(bad("terms must be sorted and unique"));
                }
            }
            kept.push((rec[0].to_owned(), df));
        }
        Ok(Vocabulary::from_sorted(kept, n_docs, spec, min_df))
    }
}

fn escape_csv(s: &str) -> String {
    if s.contains([',', ' ', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// String hash used by the hashing featurizer: the signed 32-bit polynomial
/// `h = 31*h + byte` with wrapping arithmetic.
pub fn term_hash(term: &str) -> i32 {
    term.bytes().fold(0i32, |h, b| h.wrapping_mul(31).wrapping_add(b as i32))
}

/// Feature hashing onto `2^bits` buckets. Colliding terms add up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedSpace {
    spec: NGramSpec,
    bits: u32,
}

impl HashedSpace {
    pub const MAX_BITS: u32 = 30;

    pub fn new(spec: NGramSpec, bits: u32) -> Result<Self> {
        if bits == 0 || bits > Self::MAX_BITS {
            return Err(Error::invalid(format!("hash bits must be in 1..={}", Self::MAX_BITS)));
        }
        Ok(HashedSpace { spec, bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn dim(&self) -> usize {
        1 << self.bits
    }

    /// Fibonacci multiplicative hashing of [`term_hash`] to the top `bits` bits.
    pub fn bucket(&self, term: &str) -> u32 {
        (term_hash(term) as u32).wrapping_mul(0x9E37_79B9) >> (32 - self.bits)
    }
}

/// Maps text to raw n-gram counts, either through a vocabulary or by hashing.
#[derive(Debug, Clone, PartialEq)]
pub enum Featurizer {
    Vocabulary(Vocabulary),
    Hashed(HashedSpace),
}

impl Featurizer {
    pub fn spec(&self) -> &NGramSpec {
        match self {
            Featurizer::Vocabulary(v) => v.spec(),
            Featurizer::Hashed(h) => &h.spec,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Featurizer::Vocabulary(v) => v.len(),
            Featurizer::Hashed(h) => h.dim(),
        }
    }

    pub fn counts(&self, text: &str) -> SparseVector {
        match self {
            Featurizer::Vocabulary(v) => vectorize_fc(text, v),
            Featurizer::Hashed(h) => {
                let mut pairs = Vec::new();
                for_each_ngram(text, &h.spec, |g| pairs.push((h.bucket(g), 1.0)));
                SparseVector::from_pairs(pairs)
            }
        }
    }
}

/// Raw occurrence counts of in-vocabulary n-grams.
pub fn vectorize_fc(text: &str, vocab: &Vocabulary) -> SparseVector {
    let mut pairs = Vec::new();
    for_each_ngram(text, vocab.spec(), |g| {
        if let Some(i) = vocab.index_of(g) {
            pairs.push((i, 1.0));
        }
    });
    SparseVector::from_pairs(pairs)
}

/// Smoothed inverse document frequencies: `ln((1 + n) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdfTable {
    idf: Vec<f64>,
    n_docs: usize,
}

/// Fits idf on training vectors; `df` counts the vectors with a nonzero entry.
pub fn fit_idf(vectors: &[SparseVector], dim: usize) -> IdfTable {
    let mut df = vec![0u64; dim];
    for v in vectors {
        for &i in v.indices() {
            df[i as usize] += 1;
        }
    }
    let n = vectors.len() as f64;
    IdfTable {
        idf: df.iter().map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect(),
        n_docs: vectors.len(),
    }
}

impl IdfTable {
    pub fn from_values(idf: Vec<f64>, n_docs: usize) -> Result<Self> {
        if idf.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("idf values must be finite and positive"));
        }
        Ok(IdfTable { idf, n_docs })
    }

    pub fn values(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn len(&self) -> usize {
        self.idf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idf.is_empty()
    }

    /// Scales counts by idf and L2-normalizes.
    pub fn transform(&self, counts: &SparseVector) -> SparseVector {
        let mut values: Vec<f64> = counts.iter().map(|(i, c)| c * self.idf[i]).collect();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        SparseVector {
            indices: counts.indices.clone(),
            values,
        }
    }

    /// Writes `index,idf` with round-trip float formatting.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "index,idf").map_err(io)?;
        for (i, v) in self.idf.iter().enumerate() {
            writeln!(w, "{i},{v:?}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn load_csv(path: &Path, n_docs: usize) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut idf = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |m: &str| Error::Parse {
                line: i + 2,
                message: m.to_owned(),
            };
            if rec.len() != 2 || rec[0].parse::<usize>().ok() != Some(i) {
                return Err(bad("expected index,idf with indices 0..V-1 in order"));
            }
            idf.push(rec[1].parse().map_err(|_| bad("bad idf value"))?);
        }
        IdfTable::from_values(idf, n_docs)
    }
}

/// TF-IDF: counts times idf, L2-normalized. Empty stays empty.
pub fn vectorize_tfidf(text: &str, vocab: &Vocabulary, idf: &IdfTable) -> SparseVector {
    idf.transform(&vectorize_fc(text, vocab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(mut v: Vec<String>) -> Vec<String> {
        v.sort();
        v
    }

    #[test]
    fn char_and_word_examples() {
        let spec = NGramSpec::chars(1, 2).unwrap();
        assert_eq!(sorted(extract_ngrams("abc", &spec)), ["a", "ab", "b", "bc", "c"]);
        let spec = NGramSpec::words(2, 2).unwrap();
        assert_eq!(extract_ngrams("want to work", &spec), ["want to", "to work"]);
        let got = extract_ngrams("ab cd", &NGramSpec::chars(1, 3).unwrap());
        assert_eq!(got.len(), 5 + 4 + 3);
        assert_eq!(&got[5..9], ["ab", "b ", " c", "cd"]);
        assert!(extract_ngrams("a", &NGramSpec::chars(2, 2).unwrap()).is_empty());
    }

    #[test]
    fn spec_parsing() {
        let s: NGramSpec = "char:1,7".parse().unwrap();
        assert_eq!((s.level(), s.lo(), s.hi()), (Level::Char, 1, 7));
        assert!(s.is_combined() && !s.is_individual());
        assert_eq!(s.to_string(), "char:1,7");
        for bad in ["char:0,2", "char:3,2", "chars:1,2", "char1,2", "word:1", "word:a,b"] {
            assert!(bad.parse::<NGramSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn vocabulary_examples() {
        let spec = NGramSpec::chars(2, 2).unwrap();
        let v = build_vocabulary(&["ab", "ab", "cd"], &spec, 1).unwrap();
        assert_eq!(v.terms(), ["ab", "cd"]);
        assert_eq!(v.doc_freq(), [2, 1]);
        let v = build_vocabulary(&["ab", "ab", "cd"], &spec, 2).unwrap();
        assert_eq!(v.terms(), ["ab"]);
        let v = build_vocabulary(&["a"], &spec, 1).unwrap();
        assert!(v.is_empty());
        assert!(vectorize_fc("a", &v).is_empty());
        assert!(build_vocabulary::<&str>(&[], &spec, 1).is_err());
        assert!(build_vocabulary(&["a"], &spec, 0).is_err());
    }

    #[test]
    fn fc_counts() {
        let spec = NGramSpec::chars(2, 2).unwrap();
        let v = build_vocabulary(&["ab", "ba"], &spec, 1).unwrap();
        let x = vectorize_fc("abab", &v);
        assert_eq!(x.indices(), [0, 1]);
        assert_eq!(x.values(), [2.0, 1.0]);
        assert!(vectorize_fc("", &v).is_empty());
        assert!(vectorize_fc("zzzz", &v).is_empty());
    }

    #[test]
    fn idf_formula() {
        let two = vec![SparseVector::from_pairs(vec![(0, 1.0)]); 2];
        assert_eq!(fit_idf(&two, 1).values(), [1.0]);
        let three = vec![
            SparseVector::from_pairs(vec![(0, 1.0)]),
            SparseVector::default(),
            SparseVector::default(),
        ];
        let idf = fit_idf(&three, 2);
        assert!((idf.values()[0] - (1.0 + 2f64.ln())).abs() < 1e-15);
        assert!((idf.values()[1] - (1.0 + 4f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn tfidf_values() {
        let spec = NGramSpec::chars(2, 2).unwrap();
        let v = build_vocabulary(&["ab", "ba"], &spec, 1).unwrap();
        let idf = IdfTable::from_values(vec![1.0, 1.0], 2).unwrap();
        let x = vectorize_tfidf("abab", &v, &idf);
        let r5 = 5f64.sqrt();
        assert!((x.values()[0] - 2.0 / r5).abs() < 1e-15);
        assert!((x.values()[1] - 1.0 / r5).abs() < 1e-15);
        assert_eq!(vectorize_tfidf("ab", &v, &idf).values(), [1.0]);
        assert!(vectorize_tfidf("", &v, &idf).is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = NGramSpec::chars(1, 3).unwrap();
        let v = build_vocabulary(&["a, b\"c", "x y"], &spec, 1).unwrap();
        let p = dir.path().join("vocab.csv");
        v.save_csv(&p).unwrap();
        assert_eq!(Vocabulary::load_csv(&p, spec, 2, 1).unwrap(), v);
        let vecs: Vec<_> = ["a, b\"c", "x y"].iter().map(|t| vectorize_fc(t, &v)).collect();
        let idf = fit_idf(&vecs, v.len());
        let p = dir.path().join("idf.csv");
        idf.save_csv(&p).unwrap();
        assert_eq!(IdfTable::load_csv(&p, 2).unwrap(), idf);
    }

    #[test]
    fn hashing_sums_collisions() {
        let spec = NGramSpec::chars(1, 1).unwrap();
        let h = HashedSpace::new(spec, 1).unwrap();
        let x = Featurizer::Hashed(h).counts("abcabc");
        assert_eq!(x.values().iter().sum::<f64>(), 6.0);
        assert!(x.indices().iter().all(|&i| i < 2));
        assert_eq!(term_hash("ab"), 97 * 31 + 98);
        assert!(HashedSpace::new(spec, 0).is_err());
    }

    #[test]
    fn sparse_vector_invariants() {
        let v = SparseVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, -1.0), (1, 0.5)]);
        assert_eq!(v.indices(), [1]);
        assert_eq!(v.values(), [2.5]);
        assert!(SparseVector::new(vec![2, 1], vec![1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn combined_is_union_of_individual(s in "[a-c ]{0,24}", hi in 1usize..6) {
            for level in [Level::Char, Level::Word] {
                let combined = sorted(extract_ngrams(&s, &NGramSpec::new(level, 1, hi).unwrap()));
                let union = sorted((1..=hi).flat_map(|n| extract_ngrams(&s, &NGramSpec::new(level, n, n).unwrap())).collect());
                prop_assert_eq!(combined, union);
            }
        }

        #[test]
        fn tfidf_unit_norm(docs in proptest::collection::vec("[a-d]{0,10}", 1..8)) {
            let spec = NGramSpec::chars(1, 2).unwrap();
            let v = build_vocabulary(&docs, &spec, 1).unwrap();
            let counts: Vec<_> = docs.iter().map(|d| vectorize_fc(d, &v)).collect();
            let idf = fit_idf(&counts, v.len());
            for (d, c) in docs.iter().zip(&counts) {
                prop_assert!(c.values().iter().all(|x| x.fract() == 0.0 && *x > 0.0));
                let t = vectorize_tfidf(d, &v, &idf);
                prop_assert!(t.is_empty() || (t.norm() - 1.0).abs() < 1e-12);
            }
            let again = build_vocabulary(&docs, &spec, 1).unwrap();
            prop_assert_eq!(again, v);
        }
    }
}
