//! Confusion-matrix metrics for the three-class sentiment task.
//!
//! The matrix is oriented with predicted classes on rows and actual classes
//! on columns, both in canonical order (negative, neutral, positive). The
//! binary definitions
//!
//! ```text
//! precision = TP / (TP + FP)
//! recall    = TP / (TP + FN)
//! f1        = 2 * precision * recall / (precision + recall)
//! ```
//!
//! are applied one-vs-rest: for class `c`, `TP` is the diagonal cell,
//! `FP` the rest of row `c` and `FN` the rest of column `c`. Accuracy is
//! `trace / total`. Any ratio whose denominator is zero is reported as
//! `None` rather than 0 or NaN.
//!
//! Support-weighted averages use the actual-class column sums as weights
//! and are evaluated in exact rational arithmetic before a single rounding
//! to `f64`, so weighted recall and accuracy agree bit-for-bit.

mod ratio;
mod report;

use serde::{Deserialize, Serialize};

use crate::label::{PerClass, SentimentLabel};
use ratio::Ratio;

pub use report::{render_report, EvalReport, ReportError, ReportFormat, RunMetadata};

/// A metric value, `None` when its denominator is zero.
pub type Metric = Option<f64>;

/// 3x3 count matrix: `counts[predicted][actual]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ConfusionMatrix3 {
    counts: [[u64; 3]; 3],
    total: u64,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    counts: [[u64; 3]; 3],
    total: u64,
}

impl TryFrom<MatrixRepr> for ConfusionMatrix3 {
    type Error = String;

    fn try_from(repr: MatrixRepr) -> Result<Self, String> {
        let m = ConfusionMatrix3::from_counts(repr.counts);
        if m.total != repr.total {
            return Err(format!("matrix total {} does not match cell sum {}", repr.total, m.total));
        }
        Ok(m)
    }
}

impl From<ConfusionMatrix3> for MatrixRepr {
    fn from(m: ConfusionMatrix3) -> Self {
        MatrixRepr { counts: m.counts, total: m.total }
    }
}

impl ConfusionMatrix3 {
    /// `counts[predicted][actual]`, rows and columns in canonical class order.
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        let total = counts.iter().flatten().sum();
        ConfusionMatrix3 { counts, total }
    }

    pub fn counts(&self) -> &[[u64; 3]; 3] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, predicted: SentimentLabel, actual: SentimentLabel) -> u64 {
        self.counts[predicted.index()][actual.index()]
    }

    pub fn add(&mut self, predicted: SentimentLabel, actual: SentimentLabel) {
        self.counts[predicted.index()][actual.index()] += 1;
        self.total += 1;
    }

    /// Sum of the row for `predicted`.
    pub fn predicted_count(&self, predicted: SentimentLabel) -> u64 {
        self.counts[predicted.index()].iter().sum()
    }

    /// Column sum for `actual`: the class support.
    pub fn support(&self, actual: SentimentLabel) -> u64 {
        self.counts.iter().map(|row| row[actual.index()]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    /// Relabels classes: class `c` moves to `perm[c]` on both axes.
    pub fn permuted(&self, perm: [usize; 3]) -> ConfusionMatrix3 {
        let mut counts = [[0u64; 3]; 3];
        for (p, row) in self.counts.iter().enumerate() {
            for (a, &n) in row.iter().enumerate() {
                counts[perm[p]][perm[a]] = n;
            }
        }
        ConfusionMatrix3::from_counts(counts)
    }
}

pub fn build_confusion_matrix<I>(pairs: I) -> ConfusionMatrix3
where
    I: IntoIterator<Item = (SentimentLabel, SentimentLabel)>,
{
    let mut matrix = ConfusionMatrix3::default();
    for (predicted, actual) in pairs {
        matrix.add(predicted, actual);
    }
    matrix
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClassMetrics {
    pub class: SentimentLabel,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: Metric,
    pub recall: Metric,
    pub f1: Metric,
    /// Actual-class count (column sum).
    pub support: u64,
}

struct OneVsRest {
    tp: u64,
    fp: u64,
    fn_: u64,
}

impl OneVsRest {
    fn of(matrix: &ConfusionMatrix3, class: SentimentLabel) -> Self {
        let tp = matrix.get(class, class);
        OneVsRest {
            tp,
            fp: matrix.predicted_count(class) - tp,
            fn_: matrix.support(class) - tp,
        }
    }

    fn precision(&self) -> Option<Ratio> {
        Ratio::new(self.tp, self.tp + self.fp)
    }

    fn recall(&self) -> Option<Ratio> {
        Ratio::new(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean in closed form: 2TP / (2TP + FP + FN). Undefined when
    /// either input is undefined or both are zero.
    fn f1(&self) -> Option<Ratio> {
        self.precision()?;
        self.recall()?;
        if self.tp == 0 {
            return None;
        }
        Ratio::new(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

fn f1_from(precision: Metric, recall: Metric) -> Metric {
    let (p, r) = (precision?, recall?);
    (p + r > 0.0).then(|| 2.0 * (p * r) / (p + r))
}

pub fn per_class_metrics(matrix: &ConfusionMatrix3) -> PerClass<PerClassMetrics> {
    PerClass::from_fn(|class| {
        let ovr = OneVsRest::of(matrix, class);
        let precision = ovr.precision().map(Ratio::to_f64);
        let recall = ovr.recall().map(Ratio::to_f64);
        PerClassMetrics {
            class,
            true_positives: ovr.tp,
            false_positives: ovr.fp,
            false_negatives: ovr.fn_,
            precision,
            recall,
            f1: f1_from(precision, recall),
            support: matrix.support(class),
        }
    })
}

pub fn overall_accuracy(matrix: &ConfusionMatrix3) -> Metric {
    Ratio::new(matrix.trace(), matrix.total()).map(Ratio::to_f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics {
    pub weighted_precision: Metric,
    pub weighted_recall: Metric,
    pub weighted_f1: Metric,
    pub accuracy: Metric,
    /// Classes whose per-class value was undefined for at least one measure.
    /// Each contributed 0 to the affected average while its support stayed
    /// in the denominator.
    pub undefined_classes: Vec<SentimentLabel>,
}

fn weighted_average(matrix: &ConfusionMatrix3, measure: impl Fn(&OneVsRest) -> Option<Ratio>) -> Metric {
    let total = matrix.total();
    if total == 0 {
        return None;
    }
    let exact = SentimentLabel::ALL.iter().try_fold(Ratio::ZERO, |acc, &class| {
        let value = measure(&OneVsRest::of(matrix, class)).unwrap_or(Ratio::ZERO);
        acc.checked_add(value.checked_mul_int(matrix.support(class))?)
    });
    match exact.and_then(|sum| sum.checked_div_int(total)) {
        Some(r) => Some(r.to_f64()),
        None => {
            let sum: f64 = SentimentLabel::ALL
                .iter()
                .map(|&c| {
                    let v = measure(&OneVsRest::of(matrix, c)).map_or(0.0, Ratio::to_f64);
                    v * matrix.support(c) as f64
                })
                .sum();
            Some(sum / total as f64)
        }
    }
}

pub fn weighted_metrics(matrix: &ConfusionMatrix3) -> WeightedMetrics {
    let undefined_classes = if matrix.total() == 0 {
        Vec::new()
    } else {
        SentimentLabel::ALL
            .into_iter()
            .filter(|&c| {
                let ovr = OneVsRest::of(matrix, c);
                ovr.precision().is_none() || ovr.recall().is_none() || ovr.f1().is_none()
            })
            .collect()
    };
    WeightedMetrics {
        weighted_precision: weighted_average(matrix, OneVsRest::precision),
        weighted_recall: weighted_average(matrix, OneVsRest::recall),
        weighted_f1: weighted_average(matrix, OneVsRest::f1),
        accuracy: overall_accuracy(matrix),
        undefined_classes,
    }
}

/// The two costly confusions between the polar classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossRates {
    /// P(predicted positive | actual negative).
    pub positive_given_negative: Metric,
    /// P(predicted negative | actual positive).
    pub negative_given_positive: Metric,
}

pub fn cross_misclassification_rates(matrix: &ConfusionMatrix3) -> CrossRates {
    use SentimentLabel::{Negative, Positive};
    CrossRates {
        positive_given_negative: Ratio::new(matrix.get(Positive, Negative), matrix.support(Negative))
            .map(Ratio::to_f64),
        negative_given_positive: Ratio::new(matrix.get(Negative, Positive), matrix.support(Positive))
            .map(Ratio::to_f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SentimentLabel::{Negative, Neutral, Positive};

    fn reference_matrix() -> ConfusionMatrix3 {
        ConfusionMatrix3::from_counts([[50, 23, 2], [32, 1603, 16], [0, 23, 17]])
    }

    #[test]
    fn empty_pairs_give_zero_matrix() {
        let m = build_confusion_matrix([]);
        assert_eq!(m.total(), 0);
        assert_eq!(m.counts(), &[[0; 3]; 3]);
        assert_eq!(overall_accuracy(&m), None);
        assert_eq!(weighted_metrics(&m).weighted_precision, None);
    }

    #[test]
    fn repeated_pair_fills_one_cell() {
        let m = build_confusion_matrix(std::iter::repeat_n((Neutral, Neutral), 5));
        assert_eq!(m.get(Neutral, Neutral), 5);
        assert_eq!(m.total(), 5);
    }

    #[test]
    fn pairs_are_read_as_predicted_then_actual() {
        let m = build_confusion_matrix([(Negative, Positive)]);
        assert_eq!(m.counts()[0][2], 1);
        assert_eq!(m.support(Positive), 1);
        assert_eq!(m.predicted_count(Negative), 1);
    }

    #[test]
    fn reference_matrix_per_class_values() {
        let pc = per_class_metrics(&reference_matrix());
        assert_eq!(pc[Negative].precision, Some(50.0 / 75.0));
        assert!((pc[Negative].precision.unwrap() - 0.66).abs() <= 0.0067);
        assert_eq!(pc[Positive].precision, Some(0.425));
        assert_eq!(pc[Positive].recall, Some(17.0 / 35.0));
        assert!(pc[Positive].precision.unwrap() < 0.5 && pc[Positive].recall.unwrap() < 0.5);
        assert_eq!(pc[Negative].support, 82);
        assert_eq!(pc[Neutral].support, 1649);
        assert_eq!(pc[Positive].support, 35);
    }

    #[test]
    fn perfect_classifier() {
        let m = ConfusionMatrix3::from_counts([[10, 0, 0], [0, 10, 0], [0, 0, 10]]);
        for metrics in per_class_metrics(&m).0 {
            assert_eq!((metrics.precision, metrics.recall, metrics.f1), (Some(1.0), Some(1.0), Some(1.0)));
        }
        assert_eq!(overall_accuracy(&ConfusionMatrix3::from_counts([[1, 0, 0], [0, 1, 0], [0, 0, 1]])), Some(1.0));
    }

    #[test]
    fn all_wrong_classifier_has_zero_accuracy() {
        let m = ConfusionMatrix3::from_counts([[0, 3, 1], [2, 0, 4], [5, 1, 0]]);
        assert_eq!(overall_accuracy(&m), Some(0.0));
    }

    #[test]
    fn reference_matrix_accuracy_and_weighted() {
        let m = reference_matrix();
        let acc = overall_accuracy(&m).unwrap();
        assert_eq!(acc, 1670.0 / 1766.0);
        assert!((acc - 0.9456).abs() <= 0.0001);
        let w = weighted_metrics(&m);
        assert!((w.weighted_precision.unwrap() - 0.9460).abs() <= 0.0005);
        assert!((w.weighted_f1.unwrap() - 0.9456).abs() <= 0.0005);
        assert_eq!(w.weighted_recall, w.accuracy);
        assert!(w.undefined_classes.is_empty());
    }

    #[test]
    fn reference_matrix_cross_rates() {
        let r = cross_misclassification_rates(&reference_matrix());
        assert_eq!(r.positive_given_negative, Some(0.0));
        assert_eq!(r.negative_given_positive, Some(2.0 / 35.0));
        assert!((r.negative_given_positive.unwrap() - 0.0571).abs() <= 0.0005);
    }

    #[test]
    fn diagonal_matrix_has_no_cross_confusion() {
        let m = ConfusionMatrix3::from_counts([[4, 0, 0], [0, 9, 0], [0, 0, 2]]);
        let r = cross_misclassification_rates(&m);
        assert_eq!((r.positive_given_negative, r.negative_given_positive), (Some(0.0), Some(0.0)));
    }

    #[test]
    fn empty_positive_column_leaves_second_rate_undefined() {
        let m = ConfusionMatrix3::from_counts([[4, 1, 0], [0, 9, 0], [1, 0, 0]]);
        let r = cross_misclassification_rates(&m);
        assert_eq!(r.positive_given_negative, Some(0.2));
        assert_eq!(r.negative_given_positive, None);
    }

    #[test]
    fn undefined_class_contributes_zero_but_keeps_support() {
        // Nothing predicted positive: positive precision undefined, support 2.
        let m = ConfusionMatrix3::from_counts([[3, 0, 1], [1, 4, 1], [0, 0, 0]]);
        let pc = per_class_metrics(&m);
        assert_eq!(pc[Positive].precision, None);
        assert_eq!(pc[Positive].f1, None);
        let w = weighted_metrics(&m);
        assert_eq!(w.undefined_classes, vec![Positive]);
        let expected = (0.75 * 4.0 + (4.0 / 6.0) * 4.0 + 0.0 * 2.0) / 10.0;
        assert!((w.weighted_precision.unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_precision_and_recall_leave_f1_undefined() {
        let m = ConfusionMatrix3::from_counts([[0, 2, 0], [3, 5, 0], [0, 0, 1]]);
        let pc = per_class_metrics(&m);
        assert_eq!(pc[Negative].precision, Some(0.0));
        assert_eq!(pc[Negative].recall, Some(0.0));
        assert_eq!(pc[Negative].f1, None);
    }

    #[test]
    fn serde_checks_total() {
        let json = serde_json::to_string(&reference_matrix()).unwrap();
        assert_eq!(serde_json::from_str::<ConfusionMatrix3>(&json).unwrap(), reference_matrix());
        let bad = r#"{"counts":[[1,0,0],[0,0,0],[0,0,0]],"total":2}"#;
        assert!(serde_json::from_str::<ConfusionMatrix3>(bad).is_err());
    }

    fn matrix_strategy() -> impl Strategy<Value = ConfusionMatrix3> {
        prop::array::uniform3(prop::array::uniform3(0u64..=50)).prop_map(ConfusionMatrix3::from_counts)
    }

    proptest! {
        #[test]
        fn weighted_recall_is_accuracy(m in matrix_strategy()) {
            let w = weighted_metrics(&m);
            prop_assert_eq!(w.weighted_recall, w.accuracy);
        }

        #[test]
        fn accuracy_between_extreme_recalls(m in matrix_strategy()) {
            prop_assume!(m.total() > 0);
            let acc = overall_accuracy(&m).unwrap();
            let recalls: Vec<f64> = per_class_metrics(&m).0.iter().filter_map(|c| c.recall).collect();
            let lo = recalls.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = recalls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= acc && acc <= hi + 1e-12);
        }

        #[test]
        fn permutation_consistency(m in matrix_strategy(),
                                   perm in prop::sample::select(vec![[0,1,2],[0,2,1],[1,0,2],[1,2,0],[2,0,1],[2,1,0]])) {
            let pm = m.permuted(perm);
            let a = per_class_metrics(&m);
            let b = per_class_metrics(&pm);
            for (c, &target) in perm.iter().enumerate() {
                let (x, y) = (&a.0[c], &b.0[target]);
                prop_assert_eq!((x.precision, x.recall, x.f1, x.support), (y.precision, y.recall, y.f1, y.support));
            }
            let (wa, wb) = (weighted_metrics(&m), weighted_metrics(&pm));
            prop_assert_eq!(wa.accuracy, wb.accuracy);
            prop_assert_eq!(wa.weighted_precision, wb.weighted_precision);
            prop_assert_eq!(wa.weighted_recall, wb.weighted_recall);
            prop_assert_eq!(wa.weighted_f1, wb.weighted_f1);
        }

        #[test]
        fn f1_is_harmonic_mean(m in matrix_strategy()) {
            for c in per_class_metrics(&m).0 {
                if let (Some(p), Some(r)) = (c.precision, c.recall) {
                    if p + r > 0.0 {
                        let f1 = c.f1.unwrap();
                        prop_assert!((f1 - 2.0 * p * r / (p + r)).abs() <= 1e-12);
                        prop_assert!((0.0..=1.0).contains(&f1));
                    }
                }
            }
        }
    }
}
