#![allow(dead_code)]

use std::collections::HashMap;

use mediascreen_core::classify::{Classifier, ClassifyError, Prediction, PredictionSource};
use mediascreen_core::corpus::{stratified_split, Fragment};
use mediascreen_core::textprep::LanguageTag;
use mediascreen_core::SentimentLabel::{self, Negative, Neutral, Positive};

/// Answers from a fixed id-to-label table; unknown ids fail.
pub struct TableClassifier {
    pub answers: HashMap<String, SentimentLabel>,
}

impl Classifier for TableClassifier {
    fn descriptor(&self) -> String {
        "table".into()
    }

    fn classify(&self, fragment: &Fragment) -> Result<Prediction, ClassifyError> {
        self.answers
            .get(&fragment.id)
            .map(|&l| Prediction::degenerate(l, PredictionSource::Remote))
            .ok_or_else(|| ClassifyError::Protocol { raw: format!("no answer for {}", fragment.id) })
    }
}

/// Labels by keyword: "fraud" negative, "great" positive, else neutral.
pub struct KeywordClassifier;

impl Classifier for KeywordClassifier {
    fn descriptor(&self) -> String {
        "keyword".into()
    }

    fn classify(&self, fragment: &Fragment) -> Result<Prediction, ClassifyError> {
        let text = fragment.text.to_lowercase();
        let label = if text.contains("fraud") {
            Negative
        } else if text.contains("great") {
            Positive
        } else {
            Neutral
        };
        Ok(Prediction::degenerate(label, PredictionSource::Remote))
    }
}

pub fn labeled(id: &str, label: SentimentLabel) -> Fragment {
    Fragment {
        id: id.to_string(),
        doc_id: id.split('#').next().unwrap().to_string(),
        index: 0,
        text: format!("fragment {id}"),
        lang: LanguageTag::English,
        label: Some(label),
        predicted: None,
    }
}

/// Rows are predicted, columns actual, in (negative, neutral, positive) order.
pub const TABLE: [[u64; 3]; 3] = [[50, 23, 2], [32, 1603, 16], [0, 23, 17]];

/// Per-class dataset sizes whose 0.3578 test shares round to the column sums
/// of [`TABLE`] (82, 1649, 35).
pub const DATASET_SIZES: [usize; 3] = [229, 4609, 98];

/// A labeled dataset and a classifier that, on the seed-42 test split,
/// reproduces [`TABLE`] exactly.
pub fn table_fixture(fraction: f64, seed: u64) -> (Vec<Fragment>, TableClassifier) {
    let classes = [Negative, Neutral, Positive];
    let mut fragments = Vec::new();
    for (c, &n) in DATASET_SIZES.iter().enumerate() {
        for i in 0..n {
            fragments.push(labeled(&format!("{}-{i:05}#0", classes[c].as_str()), classes[c]));
        }
    }
    let split = stratified_split(&fragments, fraction, seed).unwrap();
    let mut answers = HashMap::new();
    for (actual, label) in classes.iter().enumerate() {
        let mut test: Vec<&String> =
            split.test_ids.iter().filter(|id| id.starts_with(label.as_str())).collect();
        test.sort();
        let mut cursor = test.into_iter();
        for (predicted, row) in TABLE.iter().enumerate() {
            for _ in 0..row[actual] {
                answers.insert(cursor.next().expect("test share matches column sum").clone(), classes[predicted]);
            }
        }
        assert!(cursor.next().is_none());
    }
    (fragments, TableClassifier { answers })
}
