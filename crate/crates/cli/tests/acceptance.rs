//! Acceptance checks. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any fail.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::process::Command;

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mediascreen_core::classify::{train_baseline, Prediction, PredictionSource, ScreenedItem};
use mediascreen_core::corpus::{class_distribution, load_corpus, stratified_split, Fragment};
use mediascreen_core::metrics::{
    cross_misclassification_rates, overall_accuracy, per_class_metrics, weighted_metrics, ConfusionMatrix3,
};
use mediascreen_core::pipeline::{evaluate, ClassifierChoice, EvalParams, DEFAULT_TEST_FRACTION};
use mediascreen_core::textprep::LanguageTag;
use mediascreen_core::SentimentLabel::{self, Negative, Neutral, Positive};
use mediascreen_service::triage::{Decision, TriageError, TriageQueue, TriageStatus};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn reference_matrix() -> ConfusionMatrix3 {
    ConfusionMatrix3::from_counts([[50, 23, 2], [32, 1603, 16], [0, 23, 17]])
}

fn within(name: &str, got: Option<f64>, want: f64, tol: f64) -> Result<String, String> {
    match got {
        Some(v) if (v - want).abs() <= tol => Ok(format!("{name}={v:.4}")),
        other => Err(format!("{name}={other:?}, expected {want} +/- {tol}")),
    }
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn labeled(id: String, label: SentimentLabel, text: &str) -> Fragment {
    Fragment {
        doc_id: id.split('#').next().unwrap().to_string(),
        id,
        index: 0,
        text: text.to_string(),
        lang: LanguageTag::English,
        label: Some(label),
        predicted: None,
    }
}

fn weighted_reproduction() -> Check {
    let w = weighted_metrics(&reference_matrix());
    let parts = [
        within("accuracy", w.accuracy, 0.9456, 0.0001)?,
        within("weighted_precision", w.weighted_precision, 0.9460, 0.0005)?,
        within("weighted_f1", w.weighted_f1, 0.9456, 0.0005)?,
        within("weighted_recall", w.weighted_recall, 0.9458, 0.0025)?,
    ];
    Ok(parts.join(" "))
}

fn per_class_figures() -> Check {
    let pc = per_class_metrics(&reference_matrix());
    ensure(pc[Negative].precision == Some(50.0 / 75.0), || "negative precision is not 50/75".into())?;
    let neg = within("negative_precision", pc[Negative].precision, 0.66, 0.0067)?;
    let pos_p = within("positive_precision", pc[Positive].precision, 0.425, 1e-12)?;
    let pos_r = within("positive_recall", pc[Positive].recall, 17.0 / 35.0, 1e-12)?;
    ensure(pc[Positive].precision.unwrap() < 0.5 && pc[Positive].recall.unwrap() < 0.5, || {
        "positive precision or recall is not below 0.5".into()
    })?;
    Ok(format!("{neg} {pos_p} {pos_r}"))
}

fn cross_rates() -> Check {
    let r = cross_misclassification_rates(&reference_matrix());
    let a = within("P(pos|neg)", r.positive_given_negative, 0.0, 0.0)?;
    let b = within("P(neg|pos)", r.negative_given_positive, 0.0571, 0.0005)?;
    Ok(format!("{a} {b}"))
}

fn table1_total() -> Check {
    let mut fragments = Vec::new();
    for (label, n) in [(Negative, 133), (Neutral, 5022), (Positive, 221)] {
        for i in 0..n {
            fragments.push(labeled(format!("{label}-{i}#0"), label, "x"));
        }
    }
    let d = class_distribution(&fragments);
    ensure(d.counts.0 == [133, 5022, 221] && d.total == 5376 && d.unlabeled == 0, || format!("got {d:?}"))?;
    Ok(format!("total={}", d.total))
}

/// Binary one-vs-rest figures computed directly from cell sums.
fn oracle(m: &[[u64; 3]; 3], c: usize) -> (Option<f64>, Option<f64>, Option<f64>) {
    let tp = m[c][c] as f64;
    let predicted: f64 = m[c].iter().sum::<u64>() as f64;
    let actual: f64 = (0..3).map(|r| m[r][c]).sum::<u64>() as f64;
    let p = (predicted > 0.0).then(|| tp / predicted);
    let r = (actual > 0.0).then(|| tp / actual);
    let f = match (p, r) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    (p, r, f)
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
        _ => false,
    }
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    for n in 0..1000 {
        let mut counts = [[0u64; 3]; 3];
        for row in counts.iter_mut() {
            for cell in row.iter_mut() {
                // Frequent zeros exercise the undefined cases.
                *cell = if rng.random_bool(0.25) { 0 } else { rng.random_range(1..2000) };
            }
        }
        let m = ConfusionMatrix3::from_counts(counts);
        let pc = per_class_metrics(&m);
        for c in 0..3 {
            let (p, r, f) = oracle(&counts, c);
            let got = &pc.0[c];
            ensure(close(got.precision, p) && close(got.recall, r) && close(got.f1, f), || {
                format!("matrix {n} {counts:?} class {c}: {got:?} vs oracle {p:?} {r:?} {f:?}")
            })?;
            compared += 1;
        }
        let w = weighted_metrics(&m);
        if m.total() > 0 {
            ensure(w.weighted_recall == w.accuracy && w.accuracy == overall_accuracy(&m), || {
                format!("matrix {n} {counts:?}: weighted recall {:?} != accuracy {:?}", w.weighted_recall, w.accuracy)
            })?;
        }
    }
    Ok(format!("1000 matrices, {compared} per-class comparisons, weighted recall == accuracy on all"))
}

fn splitter() -> Check {
    let sizes = [1733u64, 6211, 2056];
    let classes = [Negative, Neutral, Positive];
    let mut fragments = Vec::new();
    for (c, &n) in sizes.iter().enumerate() {
        for i in 0..n {
            fragments.push(labeled(format!("f{c}-{i:05}#0"), classes[c], "x"));
        }
    }
    ensure(fragments.len() == 10_000, || "fixture size".into())?;
    let split = stratified_split(&fragments, DEFAULT_TEST_FRACTION, 42).map_err(|e| e.to_string())?;

    for (c, &n) in sizes.iter().enumerate() {
        // Exact round-half-up of n * 0.3578 in integer arithmetic.
        let want = (n * 3578 + 5000) / 10_000;
        let got = split.test_ids.iter().filter(|id| id.starts_with(&format!("f{c}-"))).count() as u64;
        ensure(got == want, || format!("class {c}: {got} test items, expected {want}"))?;
    }
    let all: BTreeSet<String> = fragments.iter().map(|f| f.id.clone()).collect();
    ensure(split.train_ids.is_disjoint(&split.test_ids), || "train and test overlap".into())?;
    let union: BTreeSet<String> = split.train_ids.union(&split.test_ids).cloned().collect();
    ensure(union == all, || "split does not cover every fragment".into())?;

    let mut shuffled = fragments.clone();
    shuffled.reverse();
    let again = stratified_split(&shuffled, DEFAULT_TEST_FRACTION, 42).map_err(|e| e.to_string())?;
    ensure(again == split, || "same seed gave a different split".into())?;
    let other = stratified_split(&fragments, DEFAULT_TEST_FRACTION, 43).map_err(|e| e.to_string())?;
    ensure(other.test_ids != split.test_ids, || "different seeds gave the same split".into())?;
    Ok(format!("test={} train={} deterministic, exact partition", split.test_ids.len(), split.train_ids.len()))
}

fn bundled_corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_corpus.jsonl")
}

/// Naive Bayes posterior by direct counting in the linear domain.
fn brute_force_posterior(data: &[(String, usize)], query: &[&str]) -> [f64; 3] {
    let vocab: BTreeSet<&str> = data.iter().flat_map(|(t, _)| t.split(' ')).collect();
    let mut joint = [0.0; 3];
    for (c, j) in joint.iter_mut().enumerate() {
        let docs: Vec<&str> = data.iter().filter(|(_, l)| *l == c).map(|(t, _)| t.as_str()).collect();
        let words: Vec<&str> = docs.iter().flat_map(|d| d.split(' ')).collect();
        let mut p = docs.len() as f64 / data.len() as f64;
        for q in query {
            let k = words.iter().filter(|w| *w == q).count() as f64;
            p *= (k + 1.0) / (words.len() as f64 + vocab.len() as f64);
        }
        *j = p;
    }
    let z: f64 = joint.iter().sum();
    joint.map(|j| j / z)
}

fn baseline() -> Check {
    let (_, fragments) = load_corpus(&bundled_corpus()).map_err(|e| e.to_string())?;
    let params = EvalParams { dataset: "bundled", test_fraction: DEFAULT_TEST_FRACTION, seed: 42, created_at: Utc::now() };
    let first = evaluate(&fragments, ClassifierChoice::Baseline { alpha: 1.0 }, &params).map_err(|e| e.to_string())?;
    let second = evaluate(&fragments, ClassifierChoice::Baseline { alpha: 1.0 }, &params).map_err(|e| e.to_string())?;
    ensure(first.pairs == second.pairs, || "baseline is not deterministic".into())?;
    let m = &first.report.matrix;
    let accuracy = first.report.weighted.accuracy.ok_or("no accuracy")?;
    let majority = SentimentLabel::ALL.iter().map(|&c| m.support(c)).max().unwrap() as f64 / m.total() as f64;
    ensure(accuracy >= 0.90 && accuracy > majority, || format!("accuracy {accuracy:.4}, majority {majority:.4}"))?;

    let words = ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7"];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let corpora = 500;
    for n in 0..corpora {
        let size = rng.random_range(3..=8);
        let data: Vec<(String, usize)> = (0..size)
            .map(|i| {
                let len = rng.random_range(1..4);
                let text: Vec<&str> = (0..len).map(|_| words[rng.random_range(0..words.len())]).collect();
                // The first three cover every class.
                (text.join(" "), if i < 3 { i } else { rng.random_range(0..3) })
            })
            .collect();
        let frags: Vec<Fragment> = data
            .iter()
            .enumerate()
            .map(|(i, (t, l))| labeled(format!("d{i}#0"), SentimentLabel::ALL[*l], t))
            .collect();
        let model = train_baseline(&frags, 1.0).map_err(|e| e.to_string())?;
        let qlen = rng.random_range(1..5);
        let query: Vec<&str> = (0..qlen).map(|_| words[rng.random_range(0..words.len())]).collect();
        let post = model.predict_text(&query.join(" "), LanguageTag::English).posterior();
        let want = brute_force_posterior(&data, &query);
        for (c, (got, want)) in post.0.iter().zip(want).enumerate() {
            ensure((got - want).abs() <= 1e-9, || format!("corpus {n} class {c}: {got} vs {want}"))?;
        }
    }
    Ok(format!(
        "accuracy={accuracy:.4} > majority={majority:.4} at seed 42; {corpora} small corpora match the brute-force posterior"
    ))
}

fn strip_timestamp(json: &[u8]) -> Result<serde_json::Value, String> {
    let mut v: serde_json::Value = serde_json::from_slice(json).map_err(|e| e.to_string())?;
    v["metadata"].as_object_mut().ok_or("no metadata")?.remove("created_at").ok_or("no created_at")?;
    Ok(v)
}

fn cli_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("report-{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_mediascreen"))
            .arg("eval")
            .arg("--dataset")
            .arg(bundled_corpus())
            .args(["--fraction", "0.3578", "--seed", "42", "--format", "json", "--output"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("eval exited with {status}"))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let (a, b) = (strip_timestamp(&outputs[0])?, strip_timestamp(&outputs[1])?);
    let bytes = |v: &serde_json::Value| serde_json::to_vec_pretty(v).unwrap();
    ensure(bytes(&a) == bytes(&b), || "reports differ outside the timestamp".into())?;
    for field in ["accuracy", "weighted_precision", "weighted_recall", "weighted_f1"] {
        ensure(a["weighted"][field].is_number(), || format!("report lacks {field}"))?;
    }
    // The only byte differences between the raw files are inside the timestamp.
    let text: Vec<String> = outputs.iter().map(|o| String::from_utf8_lossy(o).to_string()).collect();
    let keep = |s: &str| s.lines().filter(|l| !l.contains("\"created_at\"")).collect::<Vec<_>>().join("\n");
    ensure(keep(&text[0]) == keep(&text[1]), || "raw outputs differ outside created_at".into())?;
    Ok(format!("two runs, {} bytes each, identical apart from created_at", outputs[0].len()))
}

fn screened(n: usize, class: usize) -> ScreenedItem {
    let prediction = Prediction::degenerate(SentimentLabel::ALL[class], PredictionSource::Baseline);
    ScreenedItem {
        fragment: labeled(format!("f{n}#0"), Neutral, "text"),
        flagged: prediction.is_flagged(),
        prediction: Some(prediction),
        error: None,
    }
}

fn triage_state_machine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut queue = TriageQueue::new();
    let mut model: HashMap<String, TriageStatus> = HashMap::new();
    let mut keys: BTreeSet<(String, String)> = BTreeSet::new();
    let now = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    let (mut transitions, mut rejected) = (0, 0);

    for op in 0..10_000 {
        if rng.random_bool(0.4) {
            let run = format!("scr-{}", rng.random_range(0..20));
            let batch: Vec<ScreenedItem> =
                (0..rng.random_range(0..6)).map(|_| screened(rng.random_range(0..40), rng.random_range(0..3))).collect();
            for item in queue.enqueue(&run, &batch, now) {
                ensure(keys.insert((item.run_id.clone(), item.fragment_id.clone())), || {
                    format!("op {op}: duplicate item for {} / {}", item.run_id, item.fragment_id)
                })?;
                ensure(item.status == TriageStatus::Pending, || format!("op {op}: new item not pending"))?;
                model.insert(item.id, TriageStatus::Pending);
            }
        } else {
            let id = format!("tri-{:06}", rng.random_range(1..=model.len() + 3));
            let decision = if rng.random_bool(0.5) { Decision::Escalate } else { Decision::Dismiss };
            match (model.get(&id).copied(), queue.decide(&id, decision, "analyst", now)) {
                (Some(TriageStatus::Pending), Ok(item)) => {
                    ensure(item.status == decision.outcome(), || format!("op {op}: wrong outcome"))?;
                    model.insert(id, item.status);
                    transitions += 1;
                }
                (Some(status), Err(TriageError::AlreadyDecided { status: s, .. })) if status == s => rejected += 1,
                (None, Err(TriageError::NotFound(_))) => rejected += 1,
                (before, after) => return Err(format!("op {op}: {id} from {before:?} gave {after:?}")),
            }
        }
        queue.check_invariants().map_err(|e| format!("op {op}: {e}"))?;
    }
    ensure(queue.len() == model.len(), || "queue size differs from model".into())?;
    for item in queue.iter(None) {
        ensure(model[&item.id] == item.status && item.is_well_formed(), || format!("{} diverged", item.id))?;
    }
    Ok(format!("10000 ops: {} items, {transitions} transitions, {rejected} rejected", queue.len()))
}

fn main() {
    let checks: [Criterion; 9] = [
        ("metrics-weighted-reproduction", weighted_reproduction),
        ("metrics-per-class-figures", per_class_figures),
        ("metrics-cross-rates", cross_rates),
        ("corpus-class-table-total", table1_total),
        ("metrics-oracle-equivalence", oracle_equivalence),
        ("corpus-stratified-splitter", splitter),
        ("classify-baseline-synthetic-corpus", baseline),
        ("cli-eval-determinism", cli_determinism),
        ("service-triage-state-machine", triage_state_machine),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
