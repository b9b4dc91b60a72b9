//! Sentiment classifiers: the offline multinomial bag-of-words baseline and
//! a remote text-completion adapter, plus batch screening over both.

mod baseline;
mod batch;
mod remote;

use serde::{Deserialize, Serialize};

use crate::corpus::Fragment;
use crate::label::{PerClass, SentimentLabel};

pub use baseline::{load_model, predict_baseline, save_model, train_baseline, BaselineModel, ModelFileError, TrainError, DEFAULT_ALPHA};
pub use batch::{screen_batch, BatchResult, ScreenedItem};
pub use remote::{
    parse_remote_answer, RemoteAdapterConfig, RemoteClassifier, DEFAULT_PROMPT_TEMPLATE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Unnormalized log joint probabilities (log prior + log likelihood).
    LogJoint,
    /// Probabilities summing to one.
    Probability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    Baseline,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: SentimentLabel,
    pub scores: PerClass<f64>,
    pub score_kind: ScoreKind,
    pub source: PredictionSource,
}

/// Index of the largest score; ties go to the earliest class in canonical
/// order, so negative wins any tie.
pub fn argmax(scores: &PerClass<f64>) -> SentimentLabel {
    let mut best = SentimentLabel::Negative;
    for (label, &score) in scores.iter() {
        if score > scores[best] {
            best = label;
        }
    }
    best
}

impl Prediction {
    pub fn from_scores(scores: PerClass<f64>, score_kind: ScoreKind, source: PredictionSource) -> Self {
        Prediction { label: argmax(&scores), scores, score_kind, source }
    }

    /// All probability mass on one class.
    pub fn degenerate(label: SentimentLabel, source: PredictionSource) -> Self {
        let scores = PerClass::from_fn(|l| if l == label { 1.0 } else { 0.0 });
        Prediction { label, scores, score_kind: ScoreKind::Probability, source }
    }

    /// Normalized class probabilities.
    pub fn posterior(&self) -> PerClass<f64> {
        match self.score_kind {
            ScoreKind::LogJoint => {
                let max = self.scores.0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exp = self.scores.map(|_, &s| (s - max).exp());
                let z: f64 = exp.0.iter().sum();
                exp.map(|_, &e| e / z)
            }
            ScoreKind::Probability => {
                let z: f64 = self.scores.0.iter().sum();
                self.scores.map(|_, &s| s / z)
            }
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.label == SentimentLabel::Negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifyError {
    /// The service answered, but not with a single class word.
    #[error("remote answer is not a class label: {raw:?}")]
    Protocol { raw: String },
    /// Every attempt timed out.
    #[error("remote classifier unavailable after {attempts} attempt(s): {message}")]
    Unavailable { attempts: u32, message: String },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("remote classifier returned HTTP {status}")]
    Http { status: u16 },
    #[error("invalid classifier configuration: {0}")]
    Config(String),
}

/// Anything that can label a fragment.
pub trait Classifier: Send + Sync {
    /// Short description recorded in evaluation metadata.
    fn descriptor(&self) -> String;

    fn classify(&self, fragment: &Fragment) -> Result<Prediction, ClassifyError>;

    /// How many fragments may be in flight at once during batch screening.
    fn max_parallelism(&self) -> usize {
        1
    }
}
