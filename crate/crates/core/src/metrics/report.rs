//! Evaluation reports and their JSON, CSV and text-table renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    cross_misclassification_rates, per_class_metrics, weighted_metrics, ConfusionMatrix3, CrossRates, Metric,
    PerClassMetrics, WeightedMetrics,
};
use crate::label::{PerClass, SentimentLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub classifier: String,
    pub dataset: String,
    pub seed: Option<u64>,
    pub test_fraction: Option<f64>,
    /// The only field that differs between otherwise identical runs.
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: RunMetadata,
    pub matrix: ConfusionMatrix3,
    pub per_class: PerClass<PerClassMetrics>,
    pub weighted: WeightedMetrics,
    pub cross_rates: CrossRates,
    /// True when any per-class measure was undefined.
    pub has_undefined: bool,
}

impl EvalReport {
    pub fn from_matrix(matrix: ConfusionMatrix3, metadata: RunMetadata) -> Self {
        let weighted = weighted_metrics(&matrix);
        EvalReport {
            metadata,
            matrix,
            per_class: per_class_metrics(&matrix),
            has_undefined: !weighted.undefined_classes.is_empty(),
            weighted,
            cross_rates: cross_misclassification_rates(&matrix),
        }
    }

    /// Whether every derived number equals a fresh computation from the
    /// matrix.
    pub fn is_consistent(&self) -> bool {
        let fresh = EvalReport::from_matrix(self.matrix, self.metadata.clone());
        fresh == *self
    }

    /// Copy with every metric rounded to four decimals, half to even.
    pub fn rounded(&self) -> EvalReport {
        let r = |m: Metric| m.map(round4);
        let mut out = self.clone();
        for pc in out.per_class.0.iter_mut() {
            pc.precision = r(pc.precision);
            pc.recall = r(pc.recall);
            pc.f1 = r(pc.f1);
        }
        let w = &mut out.weighted;
        w.weighted_precision = r(w.weighted_precision);
        w.weighted_recall = r(w.weighted_recall);
        w.weighted_f1 = r(w.weighted_f1);
        w.accuracy = r(w.accuracy);
        out.cross_rates.positive_given_negative = r(out.cross_rates.positive_given_negative);
        out.cross_rates.negative_given_positive = r(out.cross_rates.negative_given_positive);
        out
    }
}

/// Four-decimal rendering. `format!` rounds exact ties to even.
pub fn fmt4(m: Metric) -> String {
    match m {
        Some(v) => format!("{v:.4}"),
        None => "n/a".to_string(),
    }
}

fn round4(v: f64) -> f64 {
    format!("{v:.4}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    TextTable,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("unknown report format `{0}` (expected json, csv or text)")]
    UnknownFormat(String),
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" | "text-table" | "table" => Ok(ReportFormat::TextTable),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(&report.rounded()).expect("reports always serialize");
            out.push(b'\n');
            out
        }
        ReportFormat::Csv => render_csv(report).into_bytes(),
        ReportFormat::TextTable => render_text(report).into_bytes(),
    }
}

fn render_csv(report: &EvalReport) -> String {
    let mut out = String::from("class,precision,recall,f1,support,accuracy\n");
    for pc in report.per_class.0.iter() {
        let _ = writeln!(out, "{},{},{},{},{},", pc.class, fmt4(pc.precision), fmt4(pc.recall), fmt4(pc.f1), pc.support);
    }
    let w = &report.weighted;
    let _ = writeln!(
        out,
        "weighted,{},{},{},{},{}",
        fmt4(w.weighted_precision),
        fmt4(w.weighted_recall),
        fmt4(w.weighted_f1),
        report.matrix.total(),
        fmt4(w.accuracy)
    );
    out
}

fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    let meta = &report.metadata;
    let _ = writeln!(out, "classifier: {}", meta.classifier);
    let _ = writeln!(out, "dataset: {}", meta.dataset);
    if let Some(seed) = meta.seed {
        let _ = writeln!(out, "seed: {seed}");
    }
    if let Some(fraction) = meta.test_fraction {
        let _ = writeln!(out, "test fraction: {fraction}");
    }

    out.push_str("\nconfusion matrix (rows: predicted, columns: actual)\n");
    out.push_str("predicted negative neutral positive\n");
    for label in SentimentLabel::ALL {
        let row = report.matrix.counts()[label.index()];
        let _ = writeln!(out, "{label} {} {} {}", row[0], row[1], row[2]);
    }
    let _ = writeln!(out, "total {}", report.matrix.total());

    out.push_str("\nclass precision recall f1 support\n");
    for pc in report.per_class.0.iter() {
        let _ = writeln!(out, "{} {} {} {} {}", pc.class, fmt4(pc.precision), fmt4(pc.recall), fmt4(pc.f1), pc.support);
    }

    let w = &report.weighted;
    out.push_str("\naccuracy weighted_precision weighted_recall weighted_f1\n");
    let _ = writeln!(
        out,
        "{} {} {} {}",
        fmt4(w.accuracy),
        fmt4(w.weighted_precision),
        fmt4(w.weighted_recall),
        fmt4(w.weighted_f1)
    );
    if !w.undefined_classes.is_empty() {
        let names: Vec<_> = w.undefined_classes.iter().map(|c| c.as_str()).collect();
        let _ = writeln!(out, "undefined classes (counted as 0): {}", names.join(" "));
    }

    out.push_str("\ncross misclassification\n");
    let _ = writeln!(out, "P(predicted positive | actual negative) {}", fmt4(report.cross_rates.positive_given_negative));
    let _ = writeln!(out, "P(predicted negative | actual positive) {}", fmt4(report.cross_rates.negative_given_positive));
    out
}
