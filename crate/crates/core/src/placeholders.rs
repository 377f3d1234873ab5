//! Classifier placeholders (dummy-ranked-second loss) and data placeholders
//! (mixup of different-class pairs trained as the unknown class).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradcore::{cross_entropy_from_logits, Matrix, SymmetricBeta};
use crate::network::{Gradients, SplitMlp};

/// Logit written over the ground-truth column so softmax gives it probability 0.
pub const MASK_LOGIT: f64 = -1e30;

/// Loss value with parameter gradients for every layer.
#[derive(Clone, Debug)]
pub struct LossOutput {
    pub loss: f64,
    pub grads: Gradients,
}

/// Copy of `combined` (B×(K+1)) with each row's ground-truth entry replaced by
/// [`MASK_LOGIT`].
pub fn masked_logits(combined: &Matrix, targets: &[usize]) -> Result<Matrix> {
    if targets.len() != combined.rows() {
        return Err(Error::dimension(
            "masked_logits",
            combined.shape(),
            format!("{} targets", targets.len()),
        ));
    }
    let unknown = combined.cols().saturating_sub(1);
    let mut out = combined.clone();
    for (r, &t) in targets.iter().enumerate() {
        if t == unknown {
            return Err(Error::Contract(format!(
                "row {r}: ground truth cannot be the unknown column {unknown}"
            )));
        }
        if t > unknown {
            return Err(Error::Index {
                what: "masked target",
                index: t,
                bound: unknown,
            });
        }
        out.set(r, t, MASK_LOGIT);
    }
    Ok(out)
}

/// `l₁ = CE(f̂(x), y) + β·CE(f̂(x)∖y, K)`, both terms averaged over the batch.
///
/// The first term is a (K+1)-way cross-entropy on the combined logits; the
/// second pushes the dummy column to rank second once the true class is
/// excluded.
pub fn loss_classifier_placeholder(
    model: &mut SplitMlp,
    x: &Matrix,
    labels: &[usize],
    beta: f64,
) -> Result<LossOutput> {
    if x.rows() == 0 {
        return Err(Error::Contract("classifier-placeholder loss on an empty batch".into()));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta {beta} must be nonnegative")));
    }
    let k = model.num_known();
    if let Some(&bad) = labels.iter().find(|&&y| y >= k) {
        return Err(Error::Contract(format!(
            "label {bad} is not a known class (K = {k})"
        )));
    }
    let logits = model.augmented_logits(x)?;
    let masked = if beta != 0.0 {
        Some(masked_logits(&logits.combined, labels)?)
    } else {
        None
    };

    let plain = cross_entropy_from_logits(&logits.combined, labels)?;
    let mut loss = plain.loss;
    let mut grad = plain.grad;
    if let Some(masked) = masked {
        let dummy_targets = vec![k; labels.len()];
        let second = cross_entropy_from_logits(&masked, &dummy_targets)?;
        loss += beta * second.loss;
        let mut g = second.grad;
        // the masked entry is a constant
        for (r, &t) in labels.iter().enumerate() {
            g.set(r, t, 0.0);
        }
        grad.add_scaled(&g, beta)?;
    }

    let mut grads = Gradients::zeros_like(model);
    let g_embedding = model.backward_heads(&logits, &grad, &mut grads)?;
    let g_hidden = model.backward_post(&g_embedding, &mut grads)?;
    model.backward_pre(&g_hidden, &mut grads)?;
    Ok(LossOutput { loss, grads })
}

/// Different-class pairs within a batch and the shared mixing weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixPairs {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub lambda: f64,
}

impl MixPairs {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

/// Pairs `(i, order[i])`, keeping only those whose labels differ.
pub fn pairs_from_order(labels: &[usize], order: &[usize], lambda: f64) -> Result<MixPairs> {
    if order.len() != labels.len() {
        return Err(Error::dimension(
            "pairs_from_order",
            format!("{} labels", labels.len()),
            format!("{} order entries", order.len()),
        ));
    }
    let (left, right) = order
        .iter()
        .enumerate()
        .filter(|&(i, &j)| labels[i] != labels[j])
        .map(|(i, &j)| (i, j))
        .unzip();
    Ok(MixPairs {
        left,
        right,
        lambda,
    })
}

/// Shuffles the batch once, masks same-class pairs and draws one λ.
pub fn build_mix_pairs<R: Rng + ?Sized>(
    labels: &[usize],
    beta: &SymmetricBeta,
    rng: &mut R,
) -> Result<MixPairs> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(rng);
    let lambda = beta.sample(rng);
    pairs_from_order(labels, &order, lambda)
}

/// `λ·left + (1−λ)·right`, elementwise.
pub fn mix_hidden(left: &Matrix, right: &Matrix, lambda: f64) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("mixing weight {lambda} outside [0, 1]")));
    }
    if left.rows() != right.rows() || left.cols() != right.cols() {
        return Err(Error::dimension("mix_hidden", left.shape(), right.shape()));
    }
    if lambda == 1.0 {
        return Ok(left.clone());
    }
    if lambda == 0.0 {
        return Ok(right.clone());
    }
    let data = left
        .data()
        .iter()
        .zip(right.data())
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    Matrix::from_vec(left.rows(), left.cols(), data)
}

/// Where the two instances are mixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixMode {
    /// After φ_pre (manifold mixup).
    #[default]
    Hidden,
    /// On raw feature rows (vanilla mixup).
    Input,
}

fn check_pairs(pairs: &MixPairs, rows: usize) -> Result<()> {
    if pairs.left.len() != pairs.right.len() {
        return Err(Error::dimension(
            "mix pairs",
            format!("{} left", pairs.left.len()),
            format!("{} right", pairs.right.len()),
        ));
    }
    if pairs.len() > rows {
        return Err(Error::Contract(format!(
            "{} pairs for a batch of {rows}",
            pairs.len()
        )));
    }
    Ok(())
}

/// Mixed-row loss given pre-embeddings `hidden`. Accumulates parameter
/// gradients of φ_post and both heads into `grads` and returns the loss and
/// the gradient w.r.t. `hidden`.
pub fn mixed_hidden_loss(
    model: &mut SplitMlp,
    hidden: &Matrix,
    pairs: &MixPairs,
    grads: &mut Gradients,
) -> Result<(f64, Matrix)> {
    check_pairs(pairs, hidden.rows())?;
    let mut grad_hidden = Matrix::zeros(hidden.rows(), hidden.cols());
    if pairs.is_empty() {
        return Ok((0.0, grad_hidden));
    }
    let left = hidden.select_rows(&pairs.left)?;
    let right = hidden.select_rows(&pairs.right)?;
    let mixed = mix_hidden(&left, &right, pairs.lambda)?;
    let embedding = model.embed_post(&mixed)?;
    let logits = model.heads_forward(&embedding)?;
    let targets = vec![model.num_known(); pairs.len()];
    let ce = cross_entropy_from_logits(&logits.combined, &targets)?;
    let g_embedding = model.backward_heads(&logits, &ce.grad, grads)?;
    let g_mixed = model.backward_post(&g_embedding, grads)?;

    let lambda = pairs.lambda;
    for (p, (&i, &j)) in pairs.left.iter().zip(&pairs.right).enumerate() {
        let g = g_mixed.row(p);
        for (dst, &v) in grad_hidden.row_mut(i).iter_mut().zip(g) {
            *dst += lambda * v;
        }
        for (dst, &v) in grad_hidden.row_mut(j).iter_mut().zip(g) {
            *dst += (1.0 - lambda) * v;
        }
    }
    Ok((ce.loss, grad_hidden))
}

/// `l₂`: mean cross-entropy of mixed rows against the unknown column K.
///
/// `Hidden` mixes `φ_pre` outputs and backpropagates through both mixed
/// branches; `Input` mixes raw rows and runs the whole network. An empty pair
/// list gives zero loss and zero gradients.
pub fn loss_data_placeholder(
    model: &mut SplitMlp,
    x: &Matrix,
    pairs: &MixPairs,
    mode: MixMode,
) -> Result<LossOutput> {
    check_pairs(pairs, x.rows())?;
    let mut grads = Gradients::zeros_like(model);
    if pairs.is_empty() {
        return Ok(LossOutput { loss: 0.0, grads });
    }
    let loss = match mode {
        MixMode::Hidden => {
            let hidden = model.embed_pre(x)?;
            let (loss, grad_hidden) = mixed_hidden_loss(model, &hidden, pairs, &mut grads)?;
            model.backward_pre(&grad_hidden, &mut grads)?;
            loss
        }
        MixMode::Input => {
            let left = x.select_rows(&pairs.left)?;
            let right = x.select_rows(&pairs.right)?;
            let mixed = mix_hidden(&left, &right, pairs.lambda)?;
            let logits = model.augmented_logits(&mixed)?;
            let targets = vec![model.num_known(); pairs.len()];
            let ce = cross_entropy_from_logits(&logits.combined, &targets)?;
            let g_embedding = model.backward_heads(&logits, &ce.grad, &mut grads)?;
            let g_hidden = model.backward_post(&g_embedding, &mut grads)?;
            model.backward_pre(&g_hidden, &mut grads)?;
            ce.loss
        }
    };
    Ok(LossOutput { loss, grads })
}
