//! Closed-set pretraining and placeholder fine-tuning.
//!
//! Every random choice comes from one seed through separate ChaCha streams
//! (initialization, pretraining order, fine-tuning order, mixup), so modes that
//! skip the mixup half still see the same batch order as modes that use it.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datastore::LabeledSet;
use crate::error::{Error, Result};
use crate::gradcore::{cross_entropy_from_logits, Matrix, MomentumState, SymmetricBeta};
use crate::network::{Architecture, Gradients, SplitMlp};
use crate::placeholders::{build_mix_pairs, LossOutput, loss_classifier_placeholder, loss_data_placeholder, MixMode};

pub const STREAM_INIT: u64 = 0;
pub const STREAM_PRETRAIN: u64 = 1;
pub const STREAM_FINETUNE: u64 = 2;
pub const STREAM_MIXUP: u64 = 3;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// Pretrained closed-set model, no fine-tuning.
    Baseline,
    /// Classifier placeholders only: `l₁`.
    DummyOnly,
    /// Data placeholders only: plain (K+1)-way CE plus `γ·l₂`.
    MixupOnly,
    /// `l₁ + γ·l₂`.
    #[default]
    Full,
}

impl TrainMode {
    fn uses_mixup(self) -> bool {
        matches!(self, TrainMode::Full | TrainMode::MixupOnly)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Weight of the masked dummy term in `l₁`.
    pub beta: f64,
    /// Weight of `l₂`.
    pub gamma: f64,
    pub num_dummy: usize,
    /// Symmetric Beta parameter for λ.
    pub alpha: f64,
    pub learning_rate: f64,
    /// Learning rate for closed-set pretraining; falls back to `learning_rate`.
    pub pretrain_learning_rate: Option<f64>,
    pub momentum: f64,
    pub batch_size: usize,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    pub mix_mode: MixMode,
    pub train_mode: TrainMode,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            gamma: 0.1,
            num_dummy: 5,
            alpha: 2.0,
            learning_rate: 0.001,
            pretrain_learning_rate: None,
            momentum: 0.9,
            batch_size: 128,
            pretrain_epochs: 100,
            finetune_epochs: 50,
            mix_mode: MixMode::Hidden,
            train_mode: TrainMode::Full,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta {} must be >= 0", self.beta));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma {} must be >= 0", self.gamma));
        }
        if self.num_dummy == 0 {
            return bad("num_dummy must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha {} must be > 0", self.alpha));
        }
        for lr in std::iter::once(self.learning_rate).chain(self.pretrain_learning_rate) {
            if !(lr > 0.0 && lr.is_finite()) {
                return bad(format!("learning rate {lr} must be > 0"));
            }
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum {} must be in [0, 1)", self.momentum));
        }
        if self.batch_size < 2 {
            return bad(format!("batch_size {} must be >= 2", self.batch_size));
        }
        Ok(())
    }

    pub fn pretrain_lr(&self) -> f64 {
        self.pretrain_learning_rate.unwrap_or(self.learning_rate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pretrain,
    Finetune,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub phase: Phase,
    pub epoch: usize,
    /// Pretraining: K-way CE. Fine-tuning: the first-half loss.
    pub mean_l1: f64,
    pub mean_l2: f64,
    pub train_accuracy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
}

impl TrainLog {
    /// Tab-separated, one line per epoch after a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("phase\tepoch\tmean_l1\tmean_l2\ttrain_accuracy\n");
        for e in &self.epochs {
            let phase = match e.phase {
                Phase::Pretrain => "pretrain",
                Phase::Finetune => "finetune",
            };
            writeln!(
                out,
                "{phase}\t{}\t{:.6}\t{:.6}\t{:.4}",
                e.epoch, e.mean_l1, e.mean_l2, e.train_accuracy
            )
            .expect("string write");
        }
        out
    }

    pub fn extend(&mut self, other: TrainLog) {
        self.epochs.extend(other.epochs);
    }
}

/// `(first ⌈B/2⌉, rest)`, order preserved.
pub fn split_batch_halves<T>(batch: &[T]) -> Result<(&[T], &[T])> {
    if batch.len() < 2 {
        return Err(Error::Contract(format!(
            "cannot halve a batch of {}",
            batch.len()
        )));
    }
    Ok(batch.split_at(batch.len().div_ceil(2)))
}

/// One epoch's batches from a fresh shuffle. A trailing batch smaller than 2
/// is dropped.
fn epoch_batches(n: usize, batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
        .chunks(batch_size)
        .filter(|c| c.len() >= 2)
        .map(<[usize]>::to_vec)
        .collect()
}

fn gather(set: &LabeledSet, rows: &[usize]) -> Result<(Matrix, Vec<usize>)> {
    Ok((
        set.features.select_rows(rows)?,
        rows.iter().map(|&r| set.labels[r]).collect(),
    ))
}

/// Closed-head argmax accuracy.
pub fn closed_accuracy(model: &SplitMlp, set: &LabeledSet) -> Result<f64> {
    if set.is_empty() {
        return Ok(0.0);
    }
    let preds = model.predict_closed(&set.features)?;
    let hits = preds.iter().zip(&set.labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / set.len() as f64)
}

fn check_known_labels(train: &LabeledSet, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Contract(format!("need at least 2 known classes, got {k}")));
    }
    if train.is_empty() {
        return Err(Error::Contract("empty training set".into()));
    }
    if let Some(&bad) = train.labels.iter().find(|&&l| l >= k) {
        return Err(Error::Contract(format!(
            "training label {bad} is not a known class (K = {k})"
        )));
    }
    Ok(())
}

/// K-way cross-entropy of the closed head. The dummy head gets zero gradient.
pub fn closed_set_loss(model: &mut SplitMlp, x: &Matrix, labels: &[usize]) -> Result<LossOutput> {
    let embedding = model.embed(x)?;
    let logits = model.closed_forward(&embedding)?;
    let ce = cross_entropy_from_logits(&logits, labels)?;
    let mut grads = Gradients::zeros_like(model);
    let g = model.backward_closed(&ce.grad, &mut grads)?;
    let g = model.backward_post(&g, &mut grads)?;
    model.backward_pre(&g, &mut grads)?;
    Ok(LossOutput { loss: ce.loss, grads })
}

/// Fresh model from the init stream of `config.seed`.
pub fn init_model(arch: &Architecture, config: &TrainConfig) -> Result<SplitMlp> {
    SplitMlp::new(arch, &mut stream_rng(config.seed, STREAM_INIT))
}

/// K-way cross-entropy training of φ and the closed head. The dummy head
/// keeps its initialization.
pub fn pretrain_closed(
    train: &LabeledSet,
    arch: &Architecture,
    config: &TrainConfig,
) -> Result<(SplitMlp, TrainLog)> {
    config.validate()?;
    check_known_labels(train, arch.num_known)?;
    if arch.input_dim != train.dim() {
        return Err(Error::dimension(
            "pretrain_closed",
            format!("architecture input {}", arch.input_dim),
            format!("data dimension {}", train.dim()),
        ));
    }
    let mut model = init_model(arch, config)?;
    let mut state = MomentumState::new(&model.tensor_lengths(), config.momentum, config.pretrain_lr())?;
    let mut rng = stream_rng(config.seed, STREAM_PRETRAIN);
    let mut log = TrainLog::default();

    for epoch in 0..config.pretrain_epochs {
        let batches = epoch_batches(train.len(), config.batch_size, &mut rng);
        let mut total = 0.0;
        for rows in &batches {
            let (x, y) = gather(train, rows)?;
            let out = closed_set_loss(&mut model, &x, &y)?;
            model.apply_gradients(&out.grads, &mut state)?;
            total += out.loss;
        }
        log.epochs.push(EpochLog {
            phase: Phase::Pretrain,
            epoch,
            mean_l1: total / batches.len().max(1) as f64,
            mean_l2: 0.0,
            train_accuracy: closed_accuracy(&model, train)?,
        });
    }
    Ok((model, log))
}

/// Placeholder fine-tuning of every parameter. Each batch is halved: the first
/// half carries the classifier loss, the second the mixup loss, and one
/// optimizer step follows on their weighted sum.
pub fn train_proser(
    model: &SplitMlp,
    train: &LabeledSet,
    config: &TrainConfig,
) -> Result<(SplitMlp, TrainLog)> {
    if config.train_mode == TrainMode::Baseline {
        return Ok((model.clone(), TrainLog::default()));
    }
    config.validate()?;
    check_known_labels(train, model.num_known())?;

    let mut model = model.clone();
    model.clear_caches();
    let mut state = MomentumState::new(&model.tensor_lengths(), config.momentum, config.learning_rate)?;
    let mut order_rng = stream_rng(config.seed, STREAM_FINETUNE);
    let mut mix_rng = stream_rng(config.seed, STREAM_MIXUP);
    let beta_dist = SymmetricBeta::new(config.alpha)?;
    let classifier_beta = match config.train_mode {
        TrainMode::MixupOnly => 0.0,
        _ => config.beta,
    };
    let mut log = TrainLog::default();

    for epoch in 0..config.finetune_epochs {
        let batches = epoch_batches(train.len(), config.batch_size, &mut order_rng);
        let (mut sum_l1, mut sum_l2) = (0.0, 0.0);
        for rows in &batches {
            let (first, second) = split_batch_halves(rows)?;
            let (x1, y1) = gather(train, first)?;
            let l1 = loss_classifier_placeholder(&mut model, &x1, &y1, classifier_beta)?;
            let mut grads = l1.grads;
            sum_l1 += l1.loss;

            if config.train_mode.uses_mixup() {
                let (x2, y2) = gather(train, second)?;
                let pairs = build_mix_pairs(&y2, &beta_dist, &mut mix_rng)?;
                let l2 = loss_data_placeholder(&mut model, &x2, &pairs, config.mix_mode)?;
                grads.add_scaled(&l2.grads, config.gamma)?;
                sum_l2 += l2.loss;
            }
            model.apply_gradients(&grads, &mut state)?;
        }
        let n = batches.len().max(1) as f64;
        log.epochs.push(EpochLog {
            phase: Phase::Finetune,
            epoch,
            mean_l1: sum_l1 / n,
            mean_l2: sum_l2 / n,
            train_accuracy: closed_accuracy(&model, train)?,
        });
    }
    Ok((model, log))
}
