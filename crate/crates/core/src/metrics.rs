//! Unknown-detection AUC, open-set macro-F1, closed-set accuracy, openness and
//! the assembled [`EvalReport`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::datastore::LabeledSet;
use crate::error::{Error, Result};
use crate::gradcore::Matrix;
use crate::network::{knownness_from_logits, open_labels, SplitMlp};

/// Mann–Whitney pair counts: `2U` in integers so ties (worth ½) stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub twice_u: u64,
    pub pairs: u64,
}

impl PairCounts {
    pub fn auc(&self) -> f64 {
        self.twice_u as f64 / (2.0 * self.pairs as f64)
    }
}

fn check_scores(known: &[f64], unknown: &[f64]) -> Result<()> {
    if known.is_empty() || unknown.is_empty() {
        return Err(Error::Contract(format!(
            "AUC needs scores on both sides ({} known, {} unknown)",
            known.len(),
            unknown.len()
        )));
    }
    if known.iter().chain(unknown).any(|v| v.is_nan()) {
        return Err(Error::Domain("AUC scores contain NaN".into()));
    }
    Ok(())
}

/// Sort-based pair counting, O(n log n).
pub fn auc_counts(known: &[f64], unknown: &[f64]) -> Result<PairCounts> {
    check_scores(known, unknown)?;
    let mut all: Vec<(f64, bool)> = known
        .iter()
        .map(|&s| (s, true))
        .chain(unknown.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    // For each tie group: every known score beats all unknowns strictly below
    // and ties with unknowns inside the group.
    let mut twice_u = 0u64;
    let mut unknown_below = 0u64;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        let (mut k_group, mut u_group) = (0u64, 0u64);
        while j < all.len() && all[j].0 == all[i].0 {
            if all[j].1 {
                k_group += 1;
            } else {
                u_group += 1;
            }
            j += 1;
        }
        twice_u += k_group * (2 * unknown_below + u_group);
        unknown_below += u_group;
        i = j;
    }
    Ok(PairCounts {
        twice_u,
        pairs: known.len() as u64 * unknown.len() as u64,
    })
}

/// Probability that a random known score exceeds a random unknown score, ties
/// counted ½.
pub fn auc(known: &[f64], unknown: &[f64]) -> Result<f64> {
    Ok(auc_counts(known, unknown)?.auc())
}

/// ROC points `(fpr, tpr)` with known as the positive class, from `(0,0)` to
/// `(1,1)`, one point per distinct threshold.
pub fn roc_curve(known: &[f64], unknown: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_scores(known, unknown)?;
    let mut all: Vec<(f64, bool)> = known
        .iter()
        .map(|&s| (s, true))
        .chain(unknown.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let (np, nn) = (known.len() as f64, unknown.len() as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let threshold = all[i].0;
        while i < all.len() && all[i].0 == threshold {
            if all[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / nn, tp as f64 / np));
    }
    Ok(points)
}

/// Trapezoidal area under `(x, y)` points.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

/// `confusion[truth][predicted]` counts.
pub fn confusion_matrix(
    predictions: &[usize],
    labels: &[usize],
    num_classes: usize,
) -> Result<Vec<Vec<u64>>> {
    if predictions.len() != labels.len() {
        return Err(Error::dimension(
            "confusion_matrix",
            format!("{} predictions", predictions.len()),
            format!("{} labels", labels.len()),
        ));
    }
    let mut m = vec![vec![0u64; num_classes]; num_classes];
    for (&p, &t) in predictions.iter().zip(labels) {
        for v in [p, t] {
            if v >= num_classes {
                return Err(Error::Index {
                    what: "class label",
                    index: v,
                    bound: num_classes,
                });
            }
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Per-class F1 from a confusion matrix; zero precision and recall give 0.
pub fn per_class_f1(confusion: &[Vec<u64>]) -> Vec<f64> {
    let n = confusion.len();
    (0..n)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
            let actual: u64 = confusion[c].iter().sum();
            // 2TP / (predicted + actual) equals 2PR/(P+R) when both are defined
            let denom = (predicted + actual) as f64;
            if tp == 0.0 || denom == 0.0 {
                0.0
            } else {
                2.0 * tp / denom
            }
        })
        .collect()
}

pub fn macro_f1_from_confusion(confusion: &[Vec<u64>]) -> f64 {
    let f1 = per_class_f1(confusion);
    if f1.is_empty() {
        return 0.0;
    }
    f1.iter().sum::<f64>() / f1.len() as f64
}

/// Unweighted mean of per-class F1 over `num_classes` classes (K known plus
/// unknown).
pub fn macro_f1(predictions: &[usize], labels: &[usize], num_classes: usize) -> Result<f64> {
    Ok(macro_f1_from_confusion(&confusion_matrix(
        predictions,
        labels,
        num_classes,
    )?))
}

/// `100·(1 − sqrt(n_train / n_test))`, in percent.
pub fn openness(n_train: usize, n_test: usize) -> Result<f64> {
    if n_train == 0 || n_train > n_test {
        return Err(Error::Domain(format!(
            "openness needs 0 < training classes ({n_train}) <= test classes ({n_test})"
        )));
    }
    Ok(100.0 * (1.0 - (n_train as f64 / n_test as f64).sqrt()))
}

/// Scalar thresholded for the ROC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Best closed logit minus calibrated dummy logit.
    Knownness,
    /// Max softmax probability of the closed head.
    MaxSoftmax,
}

/// How test rows are scored and rejected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scoring {
    /// Dummy-head rejection with the model's calibration bias.
    Knownness,
    /// Closed-head confidence; rows at or below `threshold` are rejected.
    MaxSoftmax { threshold: f64 },
}

/// Per-row output of [`Scoring::score_rows`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredRows {
    /// Open-set labels in `0..=K`, K meaning rejected.
    pub labels: Vec<usize>,
    /// Higher means more likely known.
    pub scores: Vec<f64>,
    pub closed_argmax: Vec<usize>,
}

impl Scoring {
    pub fn kind(self) -> ScoreKind {
        match self {
            Scoring::Knownness => ScoreKind::Knownness,
            Scoring::MaxSoftmax { .. } => ScoreKind::MaxSoftmax,
        }
    }

    /// The value a score must exceed to be accepted as known, expressed on the
    /// scale of the underlying statistic.
    pub fn threshold(self, model: &SplitMlp) -> f64 {
        match self {
            Scoring::Knownness => model.calibration_bias,
            Scoring::MaxSoftmax { threshold } => threshold,
        }
    }

    pub fn score_rows(self, model: &SplitMlp, features: &Matrix) -> Result<ScoredRows> {
        let logits = model.infer_augmented(features)?;
        let closed_argmax = logits.closed.row_argmax();
        let (labels, scores) = match self {
            Scoring::Knownness => (
                open_labels(&logits, model.calibration_bias),
                knownness_from_logits(&logits, model.calibration_bias),
            ),
            Scoring::MaxSoftmax { threshold } => {
                let k = model.num_known();
                let confidence = model.baseline_confidence(features)?;
                let labels = closed_argmax
                    .iter()
                    .zip(&confidence)
                    .map(|(&p, &c)| if c > threshold { p } else { k })
                    .collect();
                (labels, confidence)
            }
        };
        Ok(ScoredRows {
            labels,
            scores,
            closed_argmax,
        })
    }
}

/// Field order is the serialized key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub score: ScoreKind,
    /// `None` when the test set has no unknown rows (or no known rows).
    pub auc: Option<f64>,
    pub auc_omitted: bool,
    pub macro_f1: f64,
    /// Known test rows whose open-set prediction is their true class.
    pub closed_accuracy: f64,
    /// Closed-head argmax accuracy on known test rows, ignoring rejection.
    pub argmax_accuracy: f64,
    pub openness_pct: f64,
    /// Fraction of all test rows predicted unknown.
    pub rejection_rate: f64,
    /// Calibration bias for knownness scoring, confidence threshold otherwise.
    pub threshold: f64,
    pub num_known: usize,
    pub test_known: usize,
    pub test_unknown: usize,
    pub roc: Vec<(f64, f64)>,
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReport {
    /// Pretty JSON with fixed key order.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Evaluates `model` on a test set whose labels are in `0..=K` (K marks
/// unknown rows). `openness_counts` gives (training classes, test classes).
pub fn evaluate(
    model: &SplitMlp,
    test: &LabeledSet,
    scoring: Scoring,
    openness_counts: (usize, usize),
) -> Result<EvalReport> {
    let k = model.num_known();
    if test.is_empty() {
        return Err(Error::Contract("empty test set".into()));
    }
    if let Some(&bad) = test.labels.iter().find(|&&l| l > k) {
        return Err(Error::Index {
            what: "test label",
            index: bad,
            bound: k + 1,
        });
    }
    let scored = scoring.score_rows(model, &test.features)?;
    let (predictions, scores, closed_argmax) = (scored.labels, scored.scores, scored.closed_argmax);
    let threshold = scoring.threshold(model);

    let (mut known_scores, mut unknown_scores) = (Vec::new(), Vec::new());
    let (mut open_hits, mut argmax_hits) = (0usize, 0usize);
    for (i, &label) in test.labels.iter().enumerate() {
        if label == k {
            unknown_scores.push(scores[i]);
        } else {
            known_scores.push(scores[i]);
            open_hits += usize::from(predictions[i] == label);
            argmax_hits += usize::from(closed_argmax[i] == label);
        }
    }
    let n_known = known_scores.len();
    let fraction = |hits: usize, n: usize| if n == 0 { 0.0 } else { hits as f64 / n as f64 };

    let have_both = !known_scores.is_empty() && !unknown_scores.is_empty();
    let (auc_value, roc) = if have_both {
        (
            Some(auc(&known_scores, &unknown_scores)?),
            roc_curve(&known_scores, &unknown_scores)?,
        )
    } else {
        log::warn!("test set lacks known or unknown rows; AUC omitted");
        (None, Vec::new())
    };
    let confusion = confusion_matrix(&predictions, &test.labels, k + 1)?;
    let rejected = predictions.iter().filter(|&&p| p == k).count();

    Ok(EvalReport {
        score: scoring.kind(),
        auc: auc_value,
        auc_omitted: !have_both,
        macro_f1: macro_f1_from_confusion(&confusion),
        closed_accuracy: fraction(open_hits, n_known),
        argmax_accuracy: fraction(argmax_hits, n_known),
        openness_pct: openness(openness_counts.0, openness_counts.1)?,
        rejection_rate: rejected as f64 / test.len() as f64,
        threshold,
        num_known: k,
        test_known: n_known,
        test_unknown: unknown_scores.len(),
        roc,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3, 0.3], &[0.3, 0.3, 0.3]).unwrap(), 0.5);
        // pairs: (0.9,0.5) (0.9,0.1) (0.4,0.1) win, (0.4,0.5) loses
        assert_eq!(auc(&[0.9, 0.4], &[0.5, 0.1]).unwrap(), 0.75);
    }

    #[test]
    fn auc_needs_both_sides() {
        assert!(matches!(auc(&[], &[0.1]), Err(Error::Contract(_))));
        assert!(matches!(auc(&[0.1], &[]), Err(Error::Contract(_))));
    }

    #[test]
    fn roc_endpoints_and_area() {
        let known = [0.9, 0.4, 0.7];
        let unknown = [0.5, 0.1];
        let roc = roc_curve(&known, &unknown).unwrap();
        assert_eq!(roc.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.last(), Some(&(1.0, 1.0)));
        assert_abs_diff_eq!(
            trapezoid_area(&roc),
            auc(&known, &unknown).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn macro_f1_examples() {
        assert_eq!(macro_f1(&[0, 1, 2], &[0, 1, 2], 3).unwrap(), 1.0);

        // confusion [[2,0,0],[0,2,0],[2,0,0]]
        let labels = [0, 0, 1, 1, 2, 2];
        let preds = [0, 0, 1, 1, 0, 0];
        let f = macro_f1(&preds, &labels, 3).unwrap();
        let class0 = 2.0 * (0.5 * 1.0) / 1.5;
        assert_abs_diff_eq!(f, (class0 + 1.0 + 0.0) / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f, 0.5556, epsilon = 1e-4);

        let f = macro_f1(&[0, 0, 0, 0], &[0, 0, 1, 1], 2).unwrap();
        assert_abs_diff_eq!(f, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn macro_f1_rejects_out_of_range() {
        assert!(matches!(macro_f1(&[3], &[0], 3), Err(Error::Index { .. })));
    }

    #[test]
    fn openness_reference_values() {
        for (n_train, n_test, expected) in
            [(6, 10, 22.54), (4, 14, 46.55), (4, 54, 72.78), (20, 200, 68.37)]
        {
            let o = openness(n_train, n_test).unwrap();
            assert!((o - expected).abs() <= 0.01, "{n_train}/{n_test}: {o}");
        }
        assert_eq!(openness(5, 5).unwrap(), 0.0);
        assert!(openness(6, 4).is_err());
        assert!(openness(0, 4).is_err());
    }
}
