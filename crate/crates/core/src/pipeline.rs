//! End-to-end evaluation: split, train, predict, score.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::classify::{screen_batch, BaselineModel, Classifier, ClassifyError, TrainError};
use crate::corpus::{class_distribution, stratified_split, ClassDistribution, DatasetSplit, Fragment, SplitError};
use crate::label::SentimentLabel;
use crate::metrics::{build_confusion_matrix, EvalReport, RunMetadata};
use crate::textprep::Tokenizer;

pub const DEFAULT_TEST_FRACTION: f64 = 0.3578;

pub enum ClassifierChoice<'a> {
    /// Train a bag-of-words baseline on the training split.
    Baseline { alpha: f64 },
    /// Use an already configured classifier; the training split is unused.
    Fixed(&'a dyn Classifier),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPair {
    pub fragment_id: String,
    pub predicted: SentimentLabel,
    pub actual: SentimentLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemError {
    pub fragment_id: String,
    pub error: ClassifyError,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: EvalReport,
    /// Test-set predictions in fragment id order; the report is computed from these alone.
    pub pairs: Vec<EvalPair>,
    pub split: DatasetSplit,
    /// Test fragments the classifier failed on; they are left out of the matrix.
    pub errors: Vec<ItemError>,
    pub model: Option<BaselineModel>,
}

impl EvalOutcome {
    pub fn is_partial(&self) -> bool {
        !self.errors.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("{source} (training split: {} negative, {} neutral, {} positive)",
        .distribution.counts.0[0], .distribution.counts.0[1], .distribution.counts.0[2])]
    Train { source: TrainError, distribution: ClassDistribution },
    #[error("dataset has no labeled fragments")]
    NoLabeledData,
}

pub struct EvalParams<'a> {
    pub dataset: &'a str,
    pub test_fraction: f64,
    pub seed: u64,
    pub created_at: DateTime<Utc>,
}

/// Stratified split, then train (baseline only), predict on the test split
/// and score. Deterministic for the baseline given the fragments, fraction
/// and seed.
pub fn evaluate(
    fragments: &[Fragment],
    choice: ClassifierChoice<'_>,
    params: &EvalParams<'_>,
) -> Result<EvalOutcome, EvalError> {
    let split = stratified_split(fragments, params.test_fraction, params.seed)?;
    if split.train_ids.is_empty() && split.test_ids.is_empty() {
        return Err(EvalError::NoLabeledData);
    }

    let model = match choice {
        ClassifierChoice::Baseline { alpha } => {
            let train: Vec<&Fragment> = fragments.iter().filter(|f| split.is_train(&f.id)).collect();
            let model = BaselineModel::train(train.iter().copied(), alpha, &Tokenizer::default())
                .map_err(|source| EvalError::Train { source, distribution: class_distribution(train.iter().copied()) })?;
            Some(model)
        }
        ClassifierChoice::Fixed(_) => None,
    };
    let classifier: &dyn Classifier = match (&model, &choice) {
        (Some(m), _) => m,
        (None, ClassifierChoice::Fixed(c)) => *c,
        (None, ClassifierChoice::Baseline { .. }) => unreachable!("baseline always trains a model"),
    };

    let mut test: Vec<Fragment> = fragments.iter().filter(|f| split.is_test(&f.id)).cloned().collect();
    test.sort_by(|a, b| a.id.cmp(&b.id));
    let batch = screen_batch(classifier, &test);

    let mut pairs = Vec::with_capacity(test.len());
    let mut errors = Vec::new();
    for item in batch.items {
        let actual = item.fragment.label.expect("test split holds labeled fragments only");
        match (item.prediction, item.error) {
            (Some(p), _) => pairs.push(EvalPair { fragment_id: item.fragment.id, predicted: p.label, actual }),
            (None, Some(error)) => errors.push(ItemError { fragment_id: item.fragment.id, error }),
            (None, None) => unreachable!("screened item has a prediction or an error"),
        }
    }

    let matrix = build_confusion_matrix(pairs.iter().map(|p| (p.predicted, p.actual)));
    let metadata = RunMetadata {
        classifier: classifier.descriptor(),
        dataset: params.dataset.to_string(),
        seed: Some(params.seed),
        test_fraction: Some(params.test_fraction),
        created_at: params.created_at,
    };
    Ok(EvalOutcome { report: EvalReport::from_matrix(matrix, metadata), pairs, split, errors, model })
}
