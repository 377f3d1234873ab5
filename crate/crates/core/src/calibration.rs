//! Choice of the dummy-logit bias on known-class validation data.
//!
//! A row counts as known at bias `b` when its best closed logit strictly
//! exceeds `dummy_max + b`, i.e. when its logit gap is greater than `b`. The
//! candidate biases split the observed gap range into equal intervals and the
//! largest candidate that still accepts `target_rate` of the validation rows
//! wins.

use serde::{Deserialize, Serialize};

use crate::datastore::LabeledSet;
use crate::error::{Error, Result};
use crate::gradcore::Matrix;
use crate::network::SplitMlp;

pub const DEFAULT_TARGET_RATE: f64 = 0.95;
pub const DEFAULT_INTERVALS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub chosen_bias: f64,
    pub achieved_known_rate: f64,
    pub target_rate: f64,
    pub candidate_count: usize,
    pub gap_min: f64,
    pub gap_max: f64,
    /// No candidate reached the target; the smallest candidate was used.
    pub target_unreachable: bool,
}

/// `max_k closed_k − max_c dummy_c` for every row, bias excluded.
pub fn logit_gaps(model: &SplitMlp, features: &Matrix) -> Result<Vec<f64>> {
    if features.rows() == 0 {
        return Err(Error::Contract("calibration needs a nonempty validation set".into()));
    }
    let logits = model.infer_augmented(features)?;
    Ok(logits
        .closed
        .row_iter()
        .zip(&logits.dummy_max)
        .map(|(row, &d)| row.iter().copied().fold(f64::NEG_INFINITY, f64::max) - d)
        .collect())
}

/// `intervals + 1` evenly spaced values from `min(gaps)` to `max(gaps)`; a
/// single value when all gaps coincide.
pub fn candidate_biases(gaps: &[f64], intervals: usize) -> Result<Vec<f64>> {
    if gaps.is_empty() {
        return Err(Error::Contract("no gaps to build candidates from".into()));
    }
    if intervals == 0 {
        return Err(Error::Config("calibration needs at least one interval".into()));
    }
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / intervals as f64;
    let mut out: Vec<f64> = (0..intervals).map(|i| lo + i as f64 * step).collect();
    out.push(hi);
    Ok(out)
}

/// Fraction of gaps strictly above `bias`.
pub fn known_rate(gaps: &[f64], bias: f64) -> f64 {
    gaps.iter().filter(|&&g| g > bias).count() as f64 / gaps.len() as f64
}

/// Picks the bias from precomputed gaps.
pub fn select_bias_from_gaps(
    gaps: &[f64],
    target_rate: f64,
    intervals: usize,
) -> Result<CalibrationResult> {
    if !(0.0..=1.0).contains(&target_rate) {
        return Err(Error::Config(format!("target rate {target_rate} outside [0, 1]")));
    }
    let candidates = candidate_biases(gaps, intervals)?;
    let rates: Vec<f64> = candidates.iter().map(|&b| known_rate(gaps, b)).collect();
    let best = rates.iter().rposition(|&r| r >= target_rate);
    let (index, unreachable) = match best {
        Some(i) => (i, false),
        None => {
            log::warn!(
                "no calibration candidate keeps {target_rate} of validation rows known; \
                 using the smallest candidate"
            );
            (0, true)
        }
    };
    Ok(CalibrationResult {
        chosen_bias: candidates[index],
        achieved_known_rate: rates[index],
        target_rate,
        candidate_count: candidates.len(),
        gap_min: candidates[0],
        gap_max: *candidates.last().expect("nonempty"),
        target_unreachable: unreachable,
    })
}

/// Computes gaps on `val` and picks the bias. The model is not modified; the
/// caller installs `chosen_bias` into `calibration_bias`.
pub fn select_bias(
    model: &SplitMlp,
    val: &LabeledSet,
    target_rate: f64,
    intervals: usize,
) -> Result<CalibrationResult> {
    let gaps = logit_gaps(model, &val.features)?;
    select_bias_from_gaps(&gaps, target_rate, intervals)
}

/// The same search over closed-head max-softmax confidence, giving the
/// rejection threshold of the baseline.
pub fn select_confidence_threshold(
    model: &SplitMlp,
    val: &LabeledSet,
    target_rate: f64,
    intervals: usize,
) -> Result<CalibrationResult> {
    if val.is_empty() {
        return Err(Error::Contract("calibration needs a nonempty validation set".into()));
    }
    let confidence = model.baseline_confidence(&val.features)?;
    select_bias_from_gaps(&confidence, target_rate, intervals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcore::{Activation, DenseLayer};

    fn linear(w: Matrix) -> DenseLayer {
        let n = w.cols();
        DenseLayer::new(w, vec![0.0; n], Activation::Linear).unwrap()
    }

    #[test]
    fn gap_example() {
        let m = SplitMlp::from_layers(
            1,
            vec![],
            vec![linear(Matrix::identity(1))],
            linear(Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap()),
            linear(Matrix::from_rows(&[[0.5, 1.5]]).unwrap()),
        )
        .unwrap();
        let x = Matrix::from_rows(&[[1.0]]).unwrap();
        assert_eq!(logit_gaps(&m, &x).unwrap(), vec![1.5]);
    }

    #[test]
    fn identical_heads_give_zero_gaps() {
        let w = Matrix::from_rows(&[[1.0, -2.0], [0.5, 3.0]]).unwrap();
        let m = SplitMlp::from_layers(
            2,
            vec![],
            vec![linear(Matrix::identity(2))],
            linear(w.clone()),
            linear(w),
        )
        .unwrap();
        let x = Matrix::from_rows(&[[1.0, 2.0], [-1.0, 0.3], [0.0, 0.0]]).unwrap();
        let gaps = logit_gaps(&m, &x).unwrap();
        assert_eq!(gaps.len(), 3);
        assert!(gaps.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn candidate_grid() {
        let c = candidate_biases(&[0.0, 0.3, 1.0], 4).unwrap();
        assert_eq!(c, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(candidate_biases(&[0.7, 0.7], 10).unwrap(), vec![0.7]);
        assert_eq!(candidate_biases(&[0.0, 5.0], DEFAULT_INTERVALS).unwrap().len(), 101);
        assert!(candidate_biases(&[], 4).is_err());
    }

    #[test]
    fn rate_extremes() {
        let gaps = [0.2, 0.5, 0.9];
        assert_eq!(known_rate(&gaps, 0.2 - 1.0), 1.0);
        assert_eq!(known_rate(&gaps, 0.9 + 1.0), 0.0);
    }

    #[test]
    fn even_gaps_select_top_95() {
        let gaps: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let r = select_bias_from_gaps(&gaps, 0.95, 100).unwrap();
        // enumeration oracle: largest candidate with ≥ 95 gaps strictly above it
        let candidates = candidate_biases(&gaps, 100).unwrap();
        let oracle = candidates
            .iter()
            .copied()
            .filter(|&b| gaps.iter().filter(|&&g| g > b).count() >= 95)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.chosen_bias, oracle);
        assert_eq!(r.achieved_known_rate, 0.95);
        assert!(!r.target_unreachable);
        let admitted: Vec<f64> = gaps.iter().copied().filter(|&g| g > r.chosen_bias).collect();
        assert_eq!(admitted, gaps[5..].to_vec());
    }

    #[test]
    fn unreachable_target_falls_back_to_smallest() {
        let gaps = [1.0, 1.0, 1.0, 2.0];
        let r = select_bias_from_gaps(&gaps, 0.95, 10).unwrap();
        assert!(r.target_unreachable);
        assert_eq!(r.chosen_bias, 1.0);
        assert_eq!(r.achieved_known_rate, 0.25);
    }
}
