use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use mediascreen_core::corpus::Fragment;
use mediascreen_core::metrics::{build_confusion_matrix, EvalReport};
use mediascreen_core::pipeline::{evaluate, ClassifierChoice, EvalError, EvalPair, EvalParams, ItemError};

use crate::error::ServiceError;

/// A completed evaluation. The report is derived from `pairs` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRunRecord {
    pub run_id: String,
    pub dataset_id: String,
    pub classifier: String,
    pub seed: u64,
    pub test_fraction: f64,
    pub report: EvalReport,
    pub pairs: Vec<EvalPair>,
    #[serde(default)]
    pub errors: Vec<ItemError>,
    /// Some test fragments could not be classified.
    pub partial: bool,
    pub created_at: DateTime<Utc>,
}

impl EvalRunRecord {
    /// Recomputes the matrix and every metric from the stored pairs and
    /// compares them with the stored report.
    pub fn check_consistency(&self) -> Result<(), String> {
        let matrix = build_confusion_matrix(self.pairs.iter().map(|p| (p.predicted, p.actual)));
        if matrix != self.report.matrix {
            return Err(format!("run {}: stored matrix differs from its pairs", self.run_id));
        }
        let recomputed = EvalReport::from_matrix(matrix, self.report.metadata.clone());
        if recomputed != self.report {
            return Err(format!("run {}: stored metrics differ from recomputed ones", self.run_id));
        }
        if self.partial != !self.errors.is_empty() {
            return Err(format!("run {}: partial flag disagrees with error list", self.run_id));
        }
        let meta = &self.report.metadata;
        if meta.seed != Some(self.seed) || meta.test_fraction != Some(self.test_fraction) || meta.dataset != self.dataset_id {
            return Err(format!("run {}: metadata disagrees with run parameters", self.run_id));
        }
        Ok(())
    }
}

pub struct EvalRequest<'a> {
    pub dataset_id: &'a str,
    pub test_fraction: f64,
    pub seed: u64,
}

/// Runs split, train, predict and score; the caller assigns the run id and
/// persists the record.
pub fn run_evaluation(
    fragments: &[Fragment],
    choice: ClassifierChoice<'_>,
    request: &EvalRequest<'_>,
    now: DateTime<Utc>,
) -> Result<EvalRunRecord, ServiceError> {
    let params =
        EvalParams { dataset: request.dataset_id, test_fraction: request.test_fraction, seed: request.seed, created_at: now };
    let outcome = evaluate(fragments, choice, &params).map_err(|e| match &e {
        EvalError::Train { distribution, .. } => ServiceError::Validation {
            message: e.to_string(),
            detail: Some(serde_json::json!({ "training_distribution": distribution })),
        },
        _ => ServiceError::validation(e.to_string()),
    })?;
    Ok(EvalRunRecord {
        run_id: String::new(),
        dataset_id: request.dataset_id.to_string(),
        classifier: outcome.report.metadata.classifier.clone(),
        seed: request.seed,
        test_fraction: request.test_fraction,
        partial: outcome.is_partial(),
        report: outcome.report,
        pairs: outcome.pairs,
        errors: outcome.errors,
        created_at: now,
    })
}
