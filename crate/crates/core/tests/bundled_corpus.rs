use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use chrono::Utc;
use mediascreen_core::corpus::{class_distribution, load_corpus, Fragment};
use mediascreen_core::pipeline::{evaluate, ClassifierChoice, EvalParams, DEFAULT_TEST_FRACTION};
use mediascreen_core::SentimentLabel;

fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_corpus.jsonl")
}

fn fragments() -> Vec<Fragment> {
    load_corpus(&corpus_path()).unwrap().1
}

fn params() -> EvalParams<'static> {
    EvalParams { dataset: "synthetic_corpus", test_fraction: DEFAULT_TEST_FRACTION, seed: 42, created_at: Utc::now() }
}

/// Tokens as the tokenizer should produce them, rebuilt from first principles
/// for the scripts present in the corpus.
fn oracle_tokens(text: &str) -> Vec<String> {
    let keep = |c: char| c.is_alphanumeric() || ('\u{0980}'..='\u{09FF}').contains(&c) && !matches!(c, '\u{09F2}' | '\u{09F3}' | '\u{09FA}' | '\u{09FB}' | '\u{09FD}');
    text.split(|c: char| !keep(c) && c != '\u{200C}' && c != '\u{200D}')
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[test]
fn corpus_is_bilingual_and_fully_labeled() {
    let frags = fragments();
    let dist = class_distribution(&frags);
    assert_eq!(dist.total, 300);
    assert_eq!(dist.unlabeled, 0);
    assert_eq!(dist.counts.0, [90, 150, 60]);
    let langs: BTreeSet<_> = frags.iter().map(|f| f.lang.as_str()).collect();
    assert!(langs.contains("english") && langs.contains("bangla") && langs.contains("mixed"));
}

#[test]
fn baseline_meets_accuracy_floor_and_beats_majority() {
    let frags = fragments();
    let out = evaluate(&frags, ClassifierChoice::Baseline { alpha: 1.0 }, &params()).unwrap();
    let accuracy = out.report.weighted.accuracy.unwrap();
    let majority = out.report.matrix.support(SentimentLabel::Neutral) as f64 / out.report.matrix.total() as f64;
    assert!(accuracy >= 0.90, "accuracy {accuracy}");
    assert!(accuracy > majority, "accuracy {accuracy} vs majority {majority}");
}

#[test]
fn baseline_predictions_match_independent_naive_bayes() {
    let frags = fragments();
    let out = evaluate(&frags, ClassifierChoice::Baseline { alpha: 1.0 }, &params()).unwrap();

    let mut counts: BTreeMap<String, [f64; 3]> = BTreeMap::new();
    let mut totals = [0f64; 3];
    let mut docs = [0f64; 3];
    for f in frags.iter().filter(|f| out.split.is_train(&f.id)) {
        let c = f.label.unwrap().index();
        docs[c] += 1.0;
        for t in oracle_tokens(&f.text) {
            counts.entry(t).or_default()[c] += 1.0;
            totals[c] += 1.0;
        }
    }
    let v = counts.len() as f64;
    let n: f64 = docs.iter().sum();
    let by_id: BTreeMap<&str, &Fragment> = frags.iter().map(|f| (f.id.as_str(), f)).collect();
    for pair in &out.pairs {
        let f = by_id[pair.fragment_id.as_str()];
        let mut scores = [0f64; 3];
        for (c, score) in scores.iter_mut().enumerate() {
            *score = (docs[c] / n).ln();
            for t in oracle_tokens(&f.text) {
                let k = counts.get(&t).map_or(0.0, |x| x[c]);
                *score += ((k + 1.0) / (totals[c] + v)).ln();
            }
        }
        let mut best = 0;
        for c in 1..3 {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        assert_eq!(pair.predicted.index(), best, "{}: {:?}", f.id, scores);
    }
}
