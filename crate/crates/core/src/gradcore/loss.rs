use super::matrix::Matrix;
use crate::error::{Error, Result};

/// `log Σ exp(row) − max(row)`, as `ln_1p` of the non-maximal terms so that
/// near-one-hot rows keep full precision.
fn shifted_logsumexp(row: &[f64]) -> (f64, f64) {
    if row.is_empty() {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let best = super::matrix::argmax(row);
    let max = row[best];
    if max == f64::NEG_INFINITY {
        return (max, f64::NEG_INFINITY);
    }
    let rest: f64 = row
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &v)| (v - max).exp())
        .sum();
    (max, rest.ln_1p())
}

/// `log Σ exp(row)`, shifted by the row max.
pub fn logsumexp(row: &[f64]) -> f64 {
    let (max, tail) = shifted_logsumexp(row);
    max + tail
}

fn check_finite(logits: &Matrix, op: &str) -> Result<()> {
    if logits.data().iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::Domain(format!("{op}: non-finite logits")));
    }
    Ok(())
}

/// Row-wise softmax with per-row max subtraction.
///
/// Very negative entries (such as the ground-truth mask) get probability 0.
pub fn softmax_rows(logits: &Matrix) -> Result<Matrix> {
    check_finite(logits, "softmax")?;
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(out)
}

/// Mean cross-entropy and its gradient with respect to the logits.
#[derive(Clone, Debug)]
pub struct CrossEntropy {
    pub loss: f64,
    /// `(softmax − onehot) / batch`, same shape as the logits.
    pub grad: Matrix,
}

/// Mean over rows of `−log softmax(logits)[target]`, with log-probabilities taken
/// as `logit − logsumexp`.
pub fn cross_entropy_from_logits(logits: &Matrix, targets: &[usize]) -> Result<CrossEntropy> {
    if targets.len() != logits.rows() {
        return Err(Error::dimension(
            "cross_entropy",
            logits.shape(),
            format!("{} targets", targets.len()),
        ));
    }
    if logits.rows() == 0 {
        return Err(Error::Contract("cross_entropy on an empty batch".into()));
    }
    for &t in targets {
        if t >= logits.cols() {
            return Err(Error::Index {
                what: "cross-entropy target",
                index: t,
                bound: logits.cols(),
            });
        }
    }
    check_finite(logits, "cross_entropy")?;

    let batch = logits.rows() as f64;
    let mut grad = softmax_rows(logits)?;
    let mut total = 0.0;
    for (r, &t) in targets.iter().enumerate() {
        let row = logits.row(r);
        let (max, tail) = shifted_logsumexp(row);
        total += (max - row[t]) + tail;
        let g = grad.row_mut(r);
        g[t] -= 1.0;
        for v in g.iter_mut() {
            *v /= batch;
        }
    }
    Ok(CrossEntropy {
        loss: total / batch,
        grad,
    })
}
