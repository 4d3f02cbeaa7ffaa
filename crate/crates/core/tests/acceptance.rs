//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Oracles here are written independently of the library.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use microtext::cleaning::{clean, clean_tweet};
use microtext::corpus::{
    ingest, prepare_examples, read_examples, split, write_examples, InputFormat, LabelIndex, SplitSpec,
};
use microtext::error::ModelFileError;
use microtext::eval::{
    accuracy, read_grid_csv, run_grid, summarize, write_reports, ExperimentConfig, GridFile, RunStatus, GRID_FILES,
};
use microtext::features::{build_vocabulary, extract_ngrams, fit_idf, vectorize_fc, Level, NGramSpec, SparseVector};
use microtext::models::{
    encode_model, load_model, lr_gradient, lr_objective, mnb_fit, mnb_predict, save_model, squared_hinge_gradient,
    squared_hinge_objective, svm_fit_traced, LinearKind, LinearModel, MnbModel, Model, ModelKind, TrainSettings,
    TrainingMeta, TrainingSet,
};
use microtext::normalize::{porter_stem, NormalizerMode};
use microtext::pipeline::{FeatureConfig, TextClassifier, Weighting};
use microtext::synthetic::{generate, write_jsonl, SyntheticSpec};
use microtext::Error;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn within(start: Instant, limit: Duration) -> Outcome {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(format!("{took:.2?}"))
}

// 1 ---------------------------------------------------------------------------

fn random_unicode(rng: &mut ChaCha8Rng) -> String {
    const POOLS: &[&[char]] = &[
        &['a', 'B', 'z', 'Q', '0', '7', ' ', '!', '@', '#', '.', '/', ':', '_', '-'],
        &['é', 'Ü', 'ñ', 'ç', 'Å', 'ø', 'ß', 'Æ', 'ﬁ', 'Ⅻ', '½', 'ｆ'],
        &['\u{0301}', '\u{0308}', '\u{200b}', '\u{00a0}', '\u{2003}', '\u{3000}', '\t', '\n', '\r'],
        &['α', 'Ж', '中', '語', '😀', '🎵', 'ح', 'क', '∑', '→'],
    ];
    const TOKENS: &[&str] = &["RT", " RT ", "http://", "https://t.co/x", "#tag", "www.x.com", "aaaa", "ee"];
    let len = rng.gen_range(0..40);
    let mut s = String::new();
    for _ in 0..len {
        if rng.gen_bool(0.1) {
            s.push_str(TOKENS[rng.gen_range(0..TOKENS.len())]);
        } else if rng.gen_bool(0.05) {
            s.push(char::from_u32(rng.gen_range(0..0x3_0000)).unwrap_or('?'));
        } else {
            let pool = POOLS[rng.gen_range(0..POOLS.len())];
            s.push(pool[rng.gen_range(0..pool.len())]);
        }
    }
    s
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let goldens = [
        ("i'm so happyyyyyyyy...", "im so hapy"),
        (
            "want to work at robert half technology? we're in nc click for details.",
            "want to work at robert half technology were in nc click for details",
        ),
    ];
    for (input, want) in goldens {
        let got = clean(input);
        ensure!(got == want, "clean({input:?}) = {got:?}, want {want:?}");
    }
    let hiring = LabelIndex::from_counts(vec![("hiring".into(), 1)]);
    let tweet = "want to work at robert half technology? we're in nc click for details. #hiring";
    let got = clean_tweet(tweet, &hiring);
    ensure!(got == goldens[1].1, "hashtag not stripped: {got:?}");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let s = random_unicode(&mut rng);
        let once = clean(&s);
        let twice = clean(&once);
        ensure!(once == twice, "not idempotent on {s:?}: {once:?} -> {twice:?}");
        ensure!(
            once.bytes().all(|b| b == b' ' || b.is_ascii_lowercase() || b.is_ascii_digit()),
            "stray byte in {once:?}"
        );
    }
    within(start, Duration::from_secs(1)).map(|t| format!("2 goldens, 10000 random strings, {t}"))
}

// 2 ---------------------------------------------------------------------------

/// Brute force: every (n, start) window, n ascending.
fn brute_ngrams(text: &str, level: Level, lo: usize, hi: usize) -> Vec<String> {
    let units: Vec<String> = match level {
        Level::Char => text.chars().map(String::from).collect(),
        Level::Word => text.split(' ').filter(|w| !w.is_empty()).map(String::from).collect(),
    };
    let sep = if level == Level::Word { " " } else { "" };
    let mut out = Vec::new();
    for n in lo..=hi {
        if n > units.len() {
            break;
        }
        for start in 0..=units.len() - n {
            out.push(units[start..start + n].join(sep));
        }
    }
    out
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyz0123456789     ".chars().collect();
    for case in 0..1000 {
        let raw: String = (0..rng.gen_range(0..60)).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
        let text = clean(&raw);
        let level = if rng.gen_bool(0.5) { Level::Char } else { Level::Word };
        let lo = rng.gen_range(1..=8);
        let hi = rng.gen_range(lo..=8);
        let spec = NGramSpec::new(level, lo, hi).unwrap();
        let got = extract_ngrams(&text, &spec);
        let want = brute_ngrams(&text, level, lo, hi);
        ensure!(got == want, "case {case}: {spec} on {text:?}: {got:?} != {want:?}");
        let len = match level {
            Level::Char => text.chars().count(),
            Level::Word => text.split_whitespace().count(),
        };
        for n in lo..=hi {
            let count = got
                .iter()
                .filter(|g| match level {
                    Level::Char => g.chars().count() == n,
                    Level::Word => g.split(' ').count() == n,
                })
                .count();
            ensure!(count == (len + 1).saturating_sub(n), "case {case}: count law fails for n={n}");
        }
    }
    within(start, Duration::from_secs(10)).map(|t| format!("1000 random specs, {t}"))
}

// 3 ---------------------------------------------------------------------------

fn criterion_3() -> Outcome {
    // Terms sort as a=0, b=1, c=2, d=3. df: a=3, b=1, c=2, d=1; n=3.
    let docs = ["a b", "a c c", "a a c d"];
    let spec = NGramSpec::words(1, 1).unwrap();
    let vocab = build_vocabulary(&docs, &spec, 1).map_err(|e| e.to_string())?;
    let counts: Vec<SparseVector> = docs.iter().map(|d| vectorize_fc(d, &vocab)).collect();
    let idf = fit_idf(&counts, vocab.len());
    let idf_of = |df: f64| (4.0 / (1.0 + df)).ln() + 1.0;
    let (ia, ib, ic, id) = (idf_of(3.0), idf_of(1.0), idf_of(2.0), idf_of(1.0));
    let unit = |v: Vec<(u32, f64)>| {
        let norm = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|(i, x)| (i, x / norm)).collect::<Vec<_>>()
    };
    let expected = [
        unit(vec![(0, ia), (1, ib)]),
        unit(vec![(0, ia), (2, 2.0 * ic)]),
        unit(vec![(0, 2.0 * ia), (2, ic), (3, id)]),
    ];
    let mut worst = 0.0f64;
    for (k, (c, want)) in counts.iter().zip(&expected).enumerate() {
        let got: Vec<(u32, f64)> = idf.transform(c).iter().map(|(i, x)| (i as u32, x)).collect();
        ensure!(got.len() == want.len(), "doc {k}: {got:?} vs {want:?}");
        for ((gi, gx), (wi, wx)) in got.iter().zip(want) {
            ensure!(gi == wi, "doc {k}: index {gi} vs {wi}");
            worst = worst.max((gx - wx).abs());
        }
    }
    ensure!(worst <= 1e-12, "max deviation {worst:e}");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let corpus: Vec<String> = (0..200)
        .map(|_| (0..rng.gen_range(0..12)).map(|_| ["x", "y", "z", "xy", "q"][rng.gen_range(0..5)]).collect::<Vec<_>>().join(" "))
        .collect();
    let vocab = build_vocabulary(&corpus, &NGramSpec::chars(1, 3).unwrap(), 1).map_err(|e| e.to_string())?;
    let counts: Vec<SparseVector> = corpus.iter().map(|d| vectorize_fc(d, &vocab)).collect();
    let idf = fit_idf(&counts, vocab.len());
    for c in counts.iter().filter(|c| !c.is_empty()) {
        let norm = idf.transform(c).norm();
        ensure!((norm - 1.0).abs() <= 1e-12, "norm {norm}");
    }
    Ok(format!("max deviation {worst:.1e}, unit norms over 200 docs"))
}

// 4 ---------------------------------------------------------------------------

fn random_sparse(rng: &mut ChaCha8Rng, n_features: usize, max: u32) -> SparseVector {
    let mut pairs = Vec::new();
    for j in 0..n_features {
        if rng.gen_bool(0.4) {
            pairs.push((j as u32, rng.gen_range(1..=max) as f64));
        }
    }
    SparseVector::from_pairs(pairs)
}

/// Labels with every class present at least once.
fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut y: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    microtext::corpus::shuffle(&mut y, rng.gen());
    y
}

fn dense(x: &SparseVector, n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for (j, v) in x.iter() {
        d[j] = v;
    }
    d
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let k = rng.gen_range(2..=5);
        let v = rng.gen_range(1..=20);
        let n = rng.gen_range(k..=30);
        let x: Vec<SparseVector> = (0..n).map(|_| random_sparse(&mut rng, v, 4)).collect();
        let y = random_labels(&mut rng, n, k);
        let data = TrainingSet::new(&x, &y, k, v).map_err(|e| e.to_string())?;
        let model = mnb_fit(&data, 1.0).map_err(|e| e.to_string())?;

        // Dense Bayes with Laplace smoothing.
        let mut counts = vec![vec![0.0; v]; k];
        let mut docs = vec![0.0; k];
        for (xi, &yi) in x.iter().zip(&y) {
            docs[yi] += 1.0;
            for (t, c) in dense(xi, v).into_iter().enumerate() {
                counts[yi][t] += c;
            }
        }
        for probe in 0..5 {
            let q = if probe == 0 { SparseVector::default() } else { random_sparse(&mut rng, v, 3) };
            let qd = dense(&q, v);
            let joint: Vec<f64> = (0..k)
                .map(|c| {
                    let total: f64 = counts[c].iter().sum();
                    let mut s = (docs[c] / n as f64).ln();
                    for t in 0..v {
                        s += qd[t] * ((counts[c][t] + 1.0) / (total + v as f64)).ln();
                    }
                    s
                })
                .collect();
            let mut best = 0;
            for c in 1..k {
                if joint[c] > joint[best] {
                    best = c;
                }
            }
            let peak = joint[best];
            let log_z = peak + joint.iter().map(|s| (s - peak).exp()).sum::<f64>().ln();
            let (class, scores) = mnb_predict(&model, &q);
            ensure!(class == best, "case {case}: argmax {class} vs oracle {best}");
            for c in 0..k {
                worst = worst.max((scores[c] - (joint[c] - log_z)).abs());
            }
        }
    }
    ensure!(worst <= 1e-9, "log-posterior deviation {worst:e}");
    Ok(format!("200 instances, max deviation {worst:.1e}"))
}

// 5 ---------------------------------------------------------------------------

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn random_real_sparse(rng: &mut ChaCha8Rng, n_features: usize) -> SparseVector {
    let mut pairs = Vec::new();
    for j in 0..n_features {
        if rng.gen_bool(0.5) {
            pairs.push((j as u32, rng.gen_range(-2.0..2.0)));
        }
    }
    SparseVector::from_pairs(pairs)
}

fn criterion_5() -> Outcome {
    // Class 0 has feature 0 large, class 1 feature 1, class 2 feature 2.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..60 {
        let c = i % 3;
        let mut pairs = vec![(c as u32, 3.0 + rng.gen_range(0.0..1.0))];
        for j in 3..8 {
            if rng.gen_bool(0.5) {
                pairs.push((j, rng.gen_range(0.0..1.0)));
            }
        }
        x.push(SparseVector::from_pairs(pairs));
        y.push(c);
    }
    let data = TrainingSet::new(&x, &y, 3, 8).map_err(|e| e.to_string())?;
    let settings = TrainSettings { c_reg: 1.0, ..Default::default() };
    let (model, traces) = svm_fit_traced(&data, &settings).map_err(|e| e.to_string())?;
    let model = Model::Linear(model);
    let correct = x.iter().zip(&y).filter(|(xi, &yi)| model.predict(xi).class == yi).count();
    ensure!(correct == x.len(), "training accuracy {correct}/{}", x.len());
    for (c, trace) in traces.iter().enumerate() {
        ensure!(trace[0] == 60.0, "class {c}: objective at zero is {}", trace[0]);
        for w in trace.windows(2) {
            ensure!(w[1] <= w[0] + 1e-12, "class {c}: objective rose {} -> {}", w[0], w[1]);
        }
    }
    let signs: Vec<f64> = y.iter().map(|&c| if c == 0 { 1.0 } else { -1.0 }).collect();
    let at_zero = squared_hinge_objective(&x, &signs, &[0.0; 8], 0.0, 2.5);
    ensure!(at_zero == 2.5 * 60.0, "objective at zero with C=2.5 is {at_zero}");

    let mut worst = 0.0f64;
    for _ in 0..50 {
        let v = rng.gen_range(1..=10);
        let n = rng.gen_range(2..=20);
        let x: Vec<SparseVector> = (0..n).map(|_| random_real_sparse(&mut rng, v)).collect();
        let s: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let w: Vec<f64> = (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let c = rng.gen_range(0.1..3.0);
        let (gw, gb) = squared_hinge_gradient(&x, &s, &w, b, c);
        let h = 1e-6;
        let mut numeric = Vec::with_capacity(v + 1);
        for j in 0..=v {
            let shifted = |delta: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if j < v {
                    w2[j] += delta;
                } else {
                    b2 += delta;
                }
                squared_hinge_objective(&x, &s, &w2, b2, c)
            };
            numeric.push((shifted(h) - shifted(-h)) / (2.0 * h));
        }
        let mut analytic = gw.clone();
        analytic.push(gb);
        worst = worst.max(rel_error(&analytic, &numeric));
    }
    ensure!(worst < 1e-4, "finite-difference rel. error {worst:e}");
    Ok(format!("separable fit exact, traces monotone, grad rel. error {worst:.1e}"))
}

// 6 ---------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let k = rng.gen_range(2..=4);
        let v = rng.gen_range(1..=8);
        let n = rng.gen_range(k..=15);
        let x: Vec<SparseVector> = (0..n).map(|_| random_real_sparse(&mut rng, v)).collect();
        let y = random_labels(&mut rng, n, k);
        let data = TrainingSet::new(&x, &y, k, v).map_err(|e| e.to_string())?;
        let w: Vec<f64> = (0..k * v).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = rng.gen_range(0.1..3.0);
        let (gw, gb) = lr_gradient(&data, &w, &b, c);
        let h = 1e-5;
        let mut numeric = Vec::new();
        for j in 0..k * v + k {
            let shifted = |delta: f64| {
                let (mut w2, mut b2) = (w.clone(), b.clone());
                if j < k * v {
                    w2[j] += delta;
                } else {
                    b2[j - k * v] += delta;
                }
                lr_objective(&data, &w2, &b2, c)
            };
            numeric.push((shifted(h) - shifted(-h)) / (2.0 * h));
        }
        let analytic: Vec<f64> = gw.iter().chain(&gb).copied().collect();
        let err = rel_error(&analytic, &numeric);
        ensure!(err < 1e-5, "case {case}: rel. error {err:e}");
        worst = worst.max(err);
    }
    Ok(format!("50 instances, max rel. error {worst:.1e}"))
}

// 7 ---------------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let text = std::fs::read_to_string(data_dir().join("porter_vocabulary.tsv")).map_err(|e| e.to_string())?;
    let pairs: Vec<(&str, &str)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_once('\t').expect("word<TAB>stem"))
        .collect();
    ensure!(pairs.len() >= 100, "only {} reference pairs", pairs.len());
    for must in [("caresses", "caress"), ("hiring", "hire")] {
        ensure!(pairs.contains(&must), "reference list lacks {must:?}");
    }
    for (word, stem) in &pairs {
        let got = porter_stem(word);
        ensure!(got == *stem, "stem({word}) = {got}, reference {stem}");
        let again = porter_stem(&got);
        ensure!(again == got, "stem({got}) = {again}, not idempotent");
    }
    Ok(format!("{} pairs", pairs.len()))
}

// 8 ---------------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let cases: [(&[usize], &[&[usize]], f64); 4] = [
        (&[0, 1], &[&[0], &[2]], 0.5),
        (&[0], &[&[1, 0]], 1.0),
        (&[3, 1, 2], &[&[3], &[1], &[2, 4]], 1.0),
        (&[1, 1, 1, 0], &[&[0, 2], &[1], &[0], &[0]], 0.5),
    ];
    for (preds, gold, want) in cases {
        let gold: Vec<Vec<usize>> = gold.iter().map(|g| g.to_vec()).collect();
        let got = accuracy(preds, &gold).map_err(|e| e.to_string())?;
        ensure!(got == want, "accuracy({preds:?}, {gold:?}) = {got}, want {want}");
    }
    ensure!(accuracy(&[0, 1], &[vec![0]]).is_err(), "length mismatch accepted");
    ensure!(accuracy(&[0], &[vec![]]).is_err(), "empty gold set accepted");
    Ok("6 fixtures".into())
}

// 9 ---------------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let corpus = data_dir().join("synthetic_tweets.jsonl");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let regenerated = tmp.path().join("regenerated.jsonl");
    write_jsonl(&regenerated, &generate(&SyntheticSpec::default()).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure!(
        std::fs::read(&regenerated).ok() == std::fs::read(&corpus).ok(),
        "bundled corpus differs from the generator's output"
    );

    let ingested = ingest(&corpus, InputFormat::Jsonl).map_err(|e| e.to_string())?;
    let (index, examples) = prepare_examples(ingested.tweets, 50).map_err(|e| e.to_string())?;
    ensure!(index.len() == 5 && examples.len() == 2000, "{} labels, {} docs", index.len(), examples.len());
    let grid = GridFile::preset("paper_grid").and_then(|g| g.expand()).map_err(|e| e.to_string())?;
    let (train, test) = split(examples, &grid.split).map_err(|e| e.to_string())?;
    let rows = run_grid(&grid.configs, &index, &train, &test, 0).map_err(|e| e.to_string())?;
    let out = tmp.path().join("report");
    write_reports(&out, &rows).map_err(|e| e.to_string())?;
    for f in GRID_FILES {
        ensure!(out.join(f).is_file(), "{f} missing");
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.status.succeeded())
        .map(|r| format!("{} {}", r.config.label(), r.config.spec()))
        .collect();
    ensure!(failed.is_empty(), "failed cells: {failed:?}");

    // Summary must equal the row-wise max of the emitted grid.csv.
    let emitted = read_grid_csv(&out.join("grid.csv")).map_err(|e| e.to_string())?;
    let mut best: HashMap<(ModelKind, Weighting, NormalizerMode), f64> = HashMap::new();
    for r in emitted.iter().filter(|r| r.status == RunStatus::Ok) {
        let key = (r.config.model, r.config.features.weighting, r.config.features.normalizer);
        let e = best.entry(key).or_insert(f64::NEG_INFINITY);
        *e = e.max(r.accuracy);
    }
    let mut summary_csv = csv::Reader::from_path(out.join("summary.csv")).map_err(|e| e.to_string())?;
    let mut n_summary = 0;
    for rec in summary_csv.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let key = (
            rec[3].parse::<ModelKind>().map_err(|e| e.to_string())?,
            rec[4].parse::<Weighting>().map_err(|e| e.to_string())?,
            rec[5].parse::<NormalizerMode>().map_err(|e| e.to_string())?,
        );
        let acc: f64 = rec[2].parse().map_err(|_| "bad accuracy in summary.csv".to_string())?;
        ensure!(best.get(&key) == Some(&acc), "summary {key:?} = {acc}, grid max {:?}", best.get(&key));
        n_summary += 1;
    }
    ensure!(n_summary == best.len(), "{n_summary} summary rows for {} groups", best.len());
    ensure!(summarize(&emitted).len() == n_summary, "summarize disagrees with summary.csv");

    let find = |model, weighting, spec: &str| {
        let spec: NGramSpec = spec.parse().unwrap();
        rows.iter()
            .find(|r| {
                r.config.model == model
                    && r.config.features.weighting == weighting
                    && r.config.spec() == spec
                    && r.config.features.normalizer == NormalizerMode::None
            })
            .map(|r| r.accuracy)
    };
    let char_svm = find(ModelKind::Svm, Weighting::Tfidf, "char:1,4").ok_or("no SVM-TFIDF char(1,4) row")?;
    let word_fc = find(ModelKind::Svm, Weighting::Fc, "word:1,1").ok_or("no SVM-FC word(1,1) row")?;
    ensure!(char_svm > word_fc, "SVM-TFIDF char(1,4) {char_svm} does not beat SVM-FC word(1,1) {word_fc}");
    let t = within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{} cells, SVM-TFIDF char(1,4) {char_svm:.3} > SVM-FC word(1,1) {word_fc:.3}, {t}",
        rows.len()
    ))
}

// 10 --------------------------------------------------------------------------

/// ingest -> split -> train -> evaluate, writing every artifact under `dir`.
fn full_pipeline(corpus: &Path, dir: &Path) -> Result<(), Error> {
    let ingested = ingest(corpus, InputFormat::Jsonl)?;
    let (index, examples) = prepare_examples(ingested.tweets, 50)?;
    index.save_csv(&dir.join("labels.csv"))?;
    write_examples(&dir.join("examples.jsonl"), &examples, &index)?;
    let index = LabelIndex::load_csv(&dir.join("labels.csv"))?;
    let examples = read_examples(&dir.join("examples.jsonl"), &index)?;
    let (train, test) = split(examples, &SplitSpec::new(0.7, 11)?)?;

    let settings = TrainSettings { seed: 11, ..Default::default() };
    let mut configs = Vec::new();
    for (model, weighting, spec, hash) in [
        (ModelKind::Mnb, Weighting::Fc, "word:1,1", None),
        (ModelKind::Svm, Weighting::Tfidf, "char:1,4", None),
        (ModelKind::Lr, Weighting::Tfidf, "char:2,3", Some(14)),
    ] {
        let mut features = FeatureConfig::new(spec.parse()?, weighting);
        features.hash_bits = hash;
        let clf = TextClassifier::fit(&train, &index, &features, model, &settings)?;
        clf.save(&dir.join(format!("{model}.bin")))?;
        let preds: Vec<String> = test.iter().map(|ex| index.label(clf.predict(&ex.text)).to_owned()).collect();
        std::fs::write(dir.join(format!("{model}.predictions")), preds.join("\n")).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        let mut cfg = ExperimentConfig::new(model, weighting, features.spec);
        cfg.features = features;
        cfg.train_settings = settings;
        configs.push(cfg);
    }
    let rows = run_grid(&configs, &index, &train, &test, 0)?;
    write_reports(&dir.join("report"), &rows)
}

fn without_wall_time(csv_text: &str) -> String {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = header.iter().position(|h| *h == "wall_time_s");
    std::iter::once(header.join(","))
        .chain(lines.map(|l| {
            // Notes may contain commas; wall time sits before them.
            let fields: Vec<&str> = l.splitn(header.len(), ',').collect();
            fields
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != col)
                .map(|(_, f)| *f)
                .collect::<Vec<_>>()
                .join(",")
        }))
        .collect::<Vec<_>>()
        .join("\n")
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = tmp.path().join("tweets.jsonl");
    let spec = SyntheticSpec { n_docs: 600, seed: 99, ..Default::default() };
    write_jsonl(&corpus, &generate(&spec).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        std::fs::create_dir_all(d).map_err(|e| e.to_string())?;
        full_pipeline(&corpus, d).map_err(|e| e.to_string())?;
    }
    let files = files_under(&a);
    ensure!(files == files_under(&b), "different artifact sets");
    for f in &files {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        let same = if f.ends_with("report/grid.csv") {
            without_wall_time(&String::from_utf8_lossy(&x)) == without_wall_time(&String::from_utf8_lossy(&y))
        } else {
            x == y
        };
        ensure!(same, "{} differs between runs", f.display());
    }
    Ok(format!("{} artifacts identical", files.len()))
}

// 11 --------------------------------------------------------------------------

fn random_model(rng: &mut ChaCha8Rng) -> Model {
    let k = rng.gen_range(1..=6);
    let v = rng.gen_range(0..=40);
    let reals = |rng: &mut ChaCha8Rng, n: usize| (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect::<Vec<f64>>();
    match rng.gen_range(0..3) {
        0 => Model::Mnb(MnbModel {
            n_classes: k,
            n_features: v,
            alpha: rng.gen_range(0.1..2.0),
            log_prior: reals(rng, k),
            log_likelihood: reals(rng, k * v),
        }),
        kind => {
            let n_meta = rng.gen_range(0..=k);
            Model::Linear(LinearModel {
                kind: if kind == 1 { LinearKind::Svm } else { LinearKind::Lr },
                n_classes: k,
                n_features: v,
                weights: reals(rng, k * v),
                bias: reals(rng, k),
                c_reg: rng.gen_range(0.1..10.0),
                meta: TrainingMeta {
                    iterations: (0..n_meta).map(|_| rng.gen_range(1..1000)).collect(),
                    objectives: reals(rng, n_meta),
                },
            })
        }
    }
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = tmp.path().join("model.bin");
    for case in 0..100 {
        let model = random_model(&mut rng);
        save_model(&path, &model).map_err(|e| e.to_string())?;
        let back = load_model(&path).map_err(|e| format!("case {case}: {e}"))?;
        for _ in 0..10 {
            let x = if model.n_features() == 0 {
                SparseVector::default()
            } else {
                random_real_sparse(&mut rng, model.n_features())
            };
            let (p, q) = (model.predict(&x), back.predict(&x));
            let bits = |s: &[f64]| s.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            ensure!(p.class == q.class && bits(&p.scores) == bits(&q.scores), "case {case}: predictions differ");
        }
    }

    let bytes = encode_model(&random_model(&mut rng));
    let expect = |mutated: Vec<u8>, what: &str, ok: fn(&ModelFileError) -> bool| -> Result<(), String> {
        std::fs::write(&path, &mutated).map_err(|e| e.to_string())?;
        match load_model(&path) {
            Err(Error::ModelFile(e)) if ok(&e) => Ok(()),
            other => Err(format!("{what}: got {other:?}")),
        }
    };
    expect(bytes[..bytes.len() - 3].to_vec(), "truncated", |e| matches!(e, ModelFileError::Truncated { .. }))?;
    expect(bytes[..10].to_vec(), "header cut", |e| matches!(e, ModelFileError::Truncated { .. }))?;
    let mut flipped = bytes.clone();
    flipped[bytes.len() / 2] ^= 0x40;
    expect(flipped, "flipped byte", |e| matches!(e, ModelFileError::Checksum { .. }))?;
    let mut magic = bytes.clone();
    magic[0] = b'X';
    expect(magic, "bad magic", |e| matches!(e, ModelFileError::Version { .. }))?;
    let mut version = bytes.clone();
    version[4] = 9;
    expect(version, "bad version", |e| matches!(e, ModelFileError::Version { .. }))?;
    let mut kind = bytes.clone();
    kind[6] = 77;
    expect(kind, "bad kind", |e| matches!(e, ModelFileError::UnknownKind(77)))?;
    let mut trailing = bytes.clone();
    trailing.push(0);
    expect(trailing, "trailing byte", |e| matches!(e, ModelFileError::TrailingBytes(1)))?;
    Ok("100 round trips, 7 corruptions classified".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("cleaning goldens and idempotence", criterion_1),
        ("n-gram oracle and count law", criterion_2),
        ("tf-idf exactness", criterion_3),
        ("mnb oracle equivalence", criterion_4),
        ("svm contract", criterion_5),
        ("lr gradient check", criterion_6),
        ("porter reference vocabulary", criterion_7),
        ("accuracy metric", criterion_8),
        ("paper_grid on synthetic corpus", criterion_9),
        ("pipeline determinism", criterion_10),
        ("model serialization", criterion_11),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
