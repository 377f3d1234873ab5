//! The split model `φ = φ_post ∘ φ_pre` with a closed-set head over the K known
//! classes and a dummy head of C placeholder classifiers.
//!
//! The dummy head enters the logits only through its row-wise maximum, giving
//! K+1 combined columns where column K stands for "unknown". Training-time
//! passes (`embed_pre`, `heads_forward`, ...) cache activations in the layers
//! and take `&mut self`; the `infer_*` family and the prediction functions work
//! on a shared reference.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradcore::{
    argmax, sgd_momentum_step, softmax_rows, Activation, DenseLayer, LayerGrads, Matrix,
    MomentumState,
};

/// Standard deviation of the dummy-head initialization.
pub const DUMMY_INIT_STD: f64 = 0.01;

/// Layer widths of a [`SplitMlp`]. All hidden layers use relu; the final
/// embedding layer is linear.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub input_dim: usize,
    /// Hidden widths of φ_pre. Empty means φ_pre is the identity.
    pub pre_widths: Vec<usize>,
    /// Hidden widths of φ_post before the embedding layer.
    pub post_widths: Vec<usize>,
    pub embedding_dim: usize,
    pub num_known: usize,
    pub num_dummy: usize,
}

impl Architecture {
    pub fn new(input_dim: usize, num_known: usize, num_dummy: usize) -> Self {
        Self {
            input_dim,
            pre_widths: vec![64, 64],
            post_widths: vec![32],
            embedding_dim: 16,
            num_known,
            num_dummy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_known < 2 {
            return Err(Error::Contract(format!(
                "need at least 2 known classes, got {}",
                self.num_known
            )));
        }
        if self.num_dummy < 1 {
            return Err(Error::Contract("need at least one dummy classifier".into()));
        }
        let widths = std::iter::once(self.input_dim)
            .chain(self.pre_widths.iter().copied())
            .chain(self.post_widths.iter().copied())
            .chain(std::iter::once(self.embedding_dim));
        if widths.into_iter().any(|w| w == 0) {
            return Err(Error::Contract("layer widths must be positive".into()));
        }
        Ok(())
    }
}

/// Output of the augmented forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedLogits {
    /// `Wᵀφ(x)`, B×K.
    pub closed: Matrix,
    /// `Ŵᵀφ(x)`, B×C.
    pub dummy_all: Matrix,
    pub dummy_max: Vec<f64>,
    /// Column of `dummy_all` holding the max; ties pick the lowest index.
    pub dummy_argmax: Vec<usize>,
    /// `[closed, dummy_max]`, B×(K+1).
    pub combined: Matrix,
}

impl AugmentedLogits {
    pub fn from_heads(closed: Matrix, dummy_all: Matrix) -> Result<Self> {
        if closed.rows() != dummy_all.rows() {
            return Err(Error::dimension(
                "augmented_logits",
                closed.shape(),
                dummy_all.shape(),
            ));
        }
        let k = closed.cols();
        let dummy_argmax = dummy_all.row_argmax();
        let dummy_max: Vec<f64> = dummy_argmax
            .iter()
            .enumerate()
            .map(|(r, &c)| dummy_all.get(r, c))
            .collect();
        let mut combined = Matrix::zeros(closed.rows(), k + 1);
        for (r, &d) in dummy_max.iter().enumerate() {
            let row = combined.row_mut(r);
            row[..k].copy_from_slice(closed.row(r));
            row[k] = d;
        }
        Ok(Self {
            closed,
            dummy_all,
            dummy_max,
            dummy_argmax,
            combined,
        })
    }

    pub fn num_known(&self) -> usize {
        self.closed.cols()
    }

    /// Routes a gradient on `combined` back to the two heads. The dummy column
    /// only reaches the selected dummy classifier.
    pub fn split_gradient(&self, grad_combined: &Matrix) -> Result<(Matrix, Matrix)> {
        if grad_combined.rows() != self.combined.rows()
            || grad_combined.cols() != self.combined.cols()
        {
            return Err(Error::dimension(
                "augmented backward",
                grad_combined.shape(),
                self.combined.shape(),
            ));
        }
        let k = self.num_known();
        let grad_closed = grad_combined.column_range(0, k);
        let mut grad_dummy = Matrix::zeros(self.dummy_all.rows(), self.dummy_all.cols());
        for (r, &c) in self.dummy_argmax.iter().enumerate() {
            grad_dummy.set(r, c, grad_combined.get(r, k));
        }
        Ok((grad_closed, grad_dummy))
    }
}

/// Parameter gradients for every layer of a [`SplitMlp`], in the model's
/// canonical layer order (pre, post, closed head, dummy head).
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

impl Gradients {
    pub fn zeros_like(model: &SplitMlp) -> Self {
        Self {
            layers: model
                .layers()
                .map(|l| LayerGrads::zeros(l.inputs(), l.outputs()))
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, factor: f64) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::dimension(
                "gradients",
                format!("{} layers", self.layers.len()),
                format!("{} layers", other.layers.len()),
            ));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.add_scaled(b, factor)?;
        }
        Ok(())
    }

    /// Concatenation in the order used by [`SplitMlp::flat_parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.flatten().iter().all(|&v| v == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitMlp {
    input_dim: usize,
    pre_layers: Vec<DenseLayer>,
    post_layers: Vec<DenseLayer>,
    closed_head: DenseLayer,
    dummy_head: DenseLayer,
    pub calibration_bias: f64,
}

fn forward_all(layers: &mut [DenseLayer], x: &Matrix) -> Result<Matrix> {
    let mut h = x.clone();
    for layer in layers {
        h = layer.forward(&h)?;
    }
    Ok(h)
}

fn infer_all(layers: &[DenseLayer], x: &Matrix) -> Result<Matrix> {
    let mut h = x.clone();
    for layer in layers {
        h = layer.infer(&h)?;
    }
    Ok(h)
}

fn backward_all(
    layers: &mut [DenseLayer],
    grads: &mut [LayerGrads],
    grad_out: &Matrix,
) -> Result<Matrix> {
    let mut g = grad_out.clone();
    for (layer, slot) in layers.iter_mut().zip(grads.iter_mut()).rev() {
        let (grad_in, lg) = layer.backward(&g)?;
        slot.add_scaled(&lg, 1.0)?;
        g = grad_in;
    }
    Ok(g)
}

impl SplitMlp {
    /// Fresh model: He/Glorot initialization for φ and the closed head, small
    /// Gaussian init for the dummy head.
    pub fn new<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let mut width = arch.input_dim;
        let mut pre_layers = Vec::new();
        for &w in &arch.pre_widths {
            pre_layers.push(DenseLayer::init(width, w, Activation::Relu, rng));
            width = w;
        }
        let mut post_layers = Vec::new();
        for &w in &arch.post_widths {
            post_layers.push(DenseLayer::init(width, w, Activation::Relu, rng));
            width = w;
        }
        post_layers.push(DenseLayer::init(
            width,
            arch.embedding_dim,
            Activation::Linear,
            rng,
        ));
        let d = arch.embedding_dim;
        let closed_head = DenseLayer::init(d, arch.num_known, Activation::Linear, rng);
        let dummy_head =
            DenseLayer::gaussian(d, arch.num_dummy, DUMMY_INIT_STD, Activation::Linear, rng);
        Ok(Self {
            input_dim: arch.input_dim,
            pre_layers,
            post_layers,
            closed_head,
            dummy_head,
            calibration_bias: 0.0,
        })
    }

    /// Assembles a model from explicit layers, checking that widths chain.
    pub fn from_layers(
        input_dim: usize,
        pre_layers: Vec<DenseLayer>,
        post_layers: Vec<DenseLayer>,
        closed_head: DenseLayer,
        dummy_head: DenseLayer,
    ) -> Result<Self> {
        let mut width = input_dim;
        for layer in pre_layers.iter().chain(&post_layers) {
            if layer.inputs() != width {
                return Err(Error::dimension(
                    "split model",
                    format!("width {width}"),
                    layer.weights().shape(),
                ));
            }
            width = layer.outputs();
        }
        for head in [&closed_head, &dummy_head] {
            if head.inputs() != width {
                return Err(Error::dimension(
                    "split model head",
                    format!("embedding width {width}"),
                    head.weights().shape(),
                ));
            }
            if head.activation() != Activation::Linear {
                return Err(Error::Contract("heads must be linear".into()));
            }
        }
        if closed_head.outputs() < 2 {
            return Err(Error::Contract("need at least 2 known classes".into()));
        }
        if dummy_head.outputs() < 1 {
            return Err(Error::Contract("need at least one dummy classifier".into()));
        }
        Ok(Self {
            input_dim,
            pre_layers,
            post_layers,
            closed_head,
            dummy_head,
            calibration_bias: 0.0,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_known(&self) -> usize {
        self.closed_head.outputs()
    }

    pub fn num_dummy(&self) -> usize {
        self.dummy_head.outputs()
    }

    pub fn embedding_dim(&self) -> usize {
        self.closed_head.inputs()
    }

    /// Number of layers in φ_pre; the mixing point.
    pub fn split_index(&self) -> usize {
        self.pre_layers.len()
    }

    pub fn pre_layers(&self) -> &[DenseLayer] {
        &self.pre_layers
    }

    pub fn post_layers(&self) -> &[DenseLayer] {
        &self.post_layers
    }

    pub fn closed_head(&self) -> &DenseLayer {
        &self.closed_head
    }

    pub fn dummy_head(&self) -> &DenseLayer {
        &self.dummy_head
    }

    pub fn closed_head_mut(&mut self) -> &mut DenseLayer {
        &mut self.closed_head
    }

    pub fn dummy_head_mut(&mut self) -> &mut DenseLayer {
        &mut self.dummy_head
    }

    /// Replaces the dummy head, e.g. to reinitialize it before fine-tuning.
    pub fn set_dummy_head(&mut self, head: DenseLayer) -> Result<()> {
        if head.inputs() != self.embedding_dim() || head.activation() != Activation::Linear {
            return Err(Error::dimension(
                "set_dummy_head",
                head.weights().shape(),
                format!("embedding width {}", self.embedding_dim()),
            ));
        }
        self.dummy_head = head;
        Ok(())
    }

    /// Description of the layer stack.
    pub fn architecture(&self) -> Architecture {
        let hidden = |layers: &[DenseLayer]| layers.iter().map(DenseLayer::outputs).collect();
        let post: Vec<usize> = hidden(&self.post_layers);
        Architecture {
            input_dim: self.input_dim,
            pre_widths: hidden(&self.pre_layers),
            post_widths: post[..post.len().saturating_sub(1)].to_vec(),
            embedding_dim: self.embedding_dim(),
            num_known: self.num_known(),
            num_dummy: self.num_dummy(),
        }
    }

    /// All layers in canonical order: pre, post, closed head, dummy head.
    pub fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.pre_layers
            .iter()
            .chain(&self.post_layers)
            .chain([&self.closed_head, &self.dummy_head])
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut DenseLayer> {
        self.pre_layers
            .iter_mut()
            .chain(self.post_layers.iter_mut())
            .chain([&mut self.closed_head, &mut self.dummy_head])
    }

    fn closed_slot(&self) -> usize {
        self.pre_layers.len() + self.post_layers.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().map(DenseLayer::parameter_count).sum()
    }

    /// Every weight then bias of every layer, in canonical order.
    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in self.layers() {
            out.extend_from_slice(l.weights().data());
            out.extend_from_slice(l.biases());
        }
        out
    }

    pub fn set_flat_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::dimension(
                "set_flat_parameters",
                format!("{} parameters", self.parameter_count()),
                format!("{} values", params.len()),
            ));
        }
        let mut offset = 0;
        for l in self.layers_mut() {
            let n = l.weights().data().len();
            l.weights_mut()
                .data_mut()
                .copy_from_slice(&params[offset..offset + n]);
            offset += n;
            let m = l.biases().len();
            l.biases_mut().copy_from_slice(&params[offset..offset + m]);
            offset += m;
        }
        Ok(())
    }

    pub fn clear_caches(&mut self) {
        self.layers_mut().for_each(DenseLayer::clear_cache);
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim {
            return Err(Error::dimension(
                "model input",
                x.shape(),
                format!("input dimension {}", self.input_dim),
            ));
        }
        Ok(())
    }

    // --- training-time passes (cache activations) ---

    /// `φ_pre(x)`.
    pub fn embed_pre(&mut self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        forward_all(&mut self.pre_layers, x)
    }

    /// `φ_post(h)`.
    pub fn embed_post(&mut self, h: &Matrix) -> Result<Matrix> {
        forward_all(&mut self.post_layers, h)
    }

    pub fn embed(&mut self, x: &Matrix) -> Result<Matrix> {
        let h = self.embed_pre(x)?;
        self.embed_post(&h)
    }

    /// Both heads on an embedding.
    pub fn heads_forward(&mut self, embedding: &Matrix) -> Result<AugmentedLogits> {
        let closed = self.closed_head.forward(embedding)?;
        let dummy = self.dummy_head.forward(embedding)?;
        AugmentedLogits::from_heads(closed, dummy)
    }

    /// Closed head only, for K-way pretraining.
    pub fn closed_forward(&mut self, embedding: &Matrix) -> Result<Matrix> {
        self.closed_head.forward(embedding)
    }

    /// `f̂(x) = [Wᵀφ(x), max_c ŵ_cᵀφ(x)]`.
    pub fn augmented_logits(&mut self, x: &Matrix) -> Result<AugmentedLogits> {
        let e = self.embed(x)?;
        self.heads_forward(&e)
    }

    /// Backward through both heads for a gradient on the combined logits.
    /// Returns the gradient w.r.t. the shared embedding.
    pub fn backward_heads(
        &mut self,
        logits: &AugmentedLogits,
        grad_combined: &Matrix,
        grads: &mut Gradients,
    ) -> Result<Matrix> {
        let (grad_closed, grad_dummy) = logits.split_gradient(grad_combined)?;
        let slot = self.closed_slot();
        let (g_closed, lg_closed) = self.closed_head.backward(&grad_closed)?;
        let (g_dummy, lg_dummy) = self.dummy_head.backward(&grad_dummy)?;
        grads.layers[slot].add_scaled(&lg_closed, 1.0)?;
        grads.layers[slot + 1].add_scaled(&lg_dummy, 1.0)?;
        let mut g = g_closed;
        g.add_scaled(&g_dummy, 1.0)?;
        Ok(g)
    }

    pub fn backward_closed(&mut self, grad_closed: &Matrix, grads: &mut Gradients) -> Result<Matrix> {
        let slot = self.closed_slot();
        let (g, lg) = self.closed_head.backward(grad_closed)?;
        grads.layers[slot].add_scaled(&lg, 1.0)?;
        Ok(g)
    }

    pub fn backward_post(&mut self, grad_embedding: &Matrix, grads: &mut Gradients) -> Result<Matrix> {
        let p = self.pre_layers.len();
        let q = self.post_layers.len();
        backward_all(&mut self.post_layers, &mut grads.layers[p..p + q], grad_embedding)
    }

    pub fn backward_pre(&mut self, grad_hidden: &Matrix, grads: &mut Gradients) -> Result<Matrix> {
        let p = self.pre_layers.len();
        backward_all(&mut self.pre_layers, &mut grads.layers[..p], grad_hidden)
    }

    /// One momentum step over every parameter.
    pub fn apply_gradients(&mut self, grads: &Gradients, state: &mut MomentumState) -> Result<()> {
        let grad_slices: Vec<&[f64]> = grads
            .layers
            .iter()
            .flat_map(|g| [g.weights.data(), g.biases.as_slice()])
            .collect();
        let mut params: Vec<&mut [f64]> = Vec::with_capacity(grad_slices.len());
        for layer in self.layers_mut() {
            let (w, b) = layer.params_mut();
            params.push(w);
            params.push(b);
        }
        sgd_momentum_step(&mut params, &grad_slices, state)
    }

    /// Parameter tensor lengths in the order [`SplitMlp::apply_gradients`] uses.
    pub fn tensor_lengths(&self) -> Vec<usize> {
        self.layers()
            .flat_map(|l| [l.weights().data().len(), l.biases().len()])
            .collect()
    }

    // --- inference (no caching) ---

    pub fn infer_pre(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        infer_all(&self.pre_layers, x)
    }

    pub fn infer_post(&self, h: &Matrix) -> Result<Matrix> {
        infer_all(&self.post_layers, h)
    }

    pub fn infer_embedding(&self, x: &Matrix) -> Result<Matrix> {
        self.infer_post(&self.infer_pre(x)?)
    }

    pub fn infer_closed(&self, x: &Matrix) -> Result<Matrix> {
        self.closed_head.infer(&self.infer_embedding(x)?)
    }

    pub fn infer_heads(&self, embedding: &Matrix) -> Result<AugmentedLogits> {
        AugmentedLogits::from_heads(
            self.closed_head.infer(embedding)?,
            self.dummy_head.infer(embedding)?,
        )
    }

    pub fn infer_augmented(&self, x: &Matrix) -> Result<AugmentedLogits> {
        self.infer_heads(&self.infer_embedding(x)?)
    }

    /// Closed-set argmax over the K known classes.
    pub fn predict_closed(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.infer_closed(x)?.row_argmax())
    }

    /// Open-set labels in `0..=K`, K meaning unknown.
    pub fn predict_open(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(open_labels(&self.infer_augmented(x)?, self.calibration_bias))
    }

    /// `max_k closed_k − (dummy_max + bias)`; higher means more likely known.
    pub fn knownness_score(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(knownness_from_logits(&self.infer_augmented(x)?, self.calibration_bias))
    }

    /// Max softmax probability over the closed head alone.
    pub fn baseline_confidence(&self, x: &Matrix) -> Result<Vec<f64>> {
        let probs = softmax_rows(&self.infer_closed(x)?)?;
        Ok(probs
            .row_iter()
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect())
    }
}

/// Open-set decision for precomputed logits.
pub fn open_labels(logits: &AugmentedLogits, bias: f64) -> Vec<usize> {
    let k = logits.num_known();
    logits
        .closed
        .row_iter()
        .zip(&logits.dummy_max)
        .map(|(row, &d)| {
            let best = argmax(row);
            if d + bias > row[best] {
                k
            } else {
                best
            }
        })
        .collect()
}

pub fn knownness_from_logits(logits: &AugmentedLogits, bias: f64) -> Vec<f64> {
    logits
        .closed
        .row_iter()
        .zip(&logits.dummy_max)
        .map(|(row, &d)| row.iter().copied().fold(f64::NEG_INFINITY, f64::max) - (d + bias))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linear(weights: Matrix) -> DenseLayer {
        let n = weights.cols();
        DenseLayer::new(weights, vec![0.0; n], Activation::Linear).unwrap()
    }

    /// Heads-only model over a 1-wide identity embedding chosen so the logits
    /// equal the given constants times the input (use x = [[1]]).
    fn constant_model(closed: &[f64], dummy: &[f64]) -> SplitMlp {
        SplitMlp::from_layers(
            1,
            vec![],
            vec![linear(Matrix::identity(1))],
            linear(Matrix::from_rows(&[closed]).unwrap()),
            linear(Matrix::from_rows(&[dummy]).unwrap()),
        )
        .unwrap()
    }

    fn one() -> Matrix {
        Matrix::from_rows(&[[1.0]]).unwrap()
    }

    #[test]
    fn empty_pre_is_identity() {
        let mut m = constant_model(&[1.0, 2.0], &[0.0]);
        let x = Matrix::from_rows(&[[0.5], [-2.0]]).unwrap();
        assert_eq!(m.embed_pre(&x).unwrap(), x);
        assert_eq!(m.split_index(), 0);
    }

    #[test]
    fn identity_pre_layer_is_passthrough() {
        let mut m = SplitMlp::from_layers(
            2,
            vec![linear(Matrix::identity(2))],
            vec![linear(Matrix::identity(2))],
            linear(Matrix::identity(2)),
            linear(Matrix::from_rows(&[[1.0], [0.0]]).unwrap()),
        )
        .unwrap();
        let x = Matrix::from_rows(&[[0.5, -1.0]]).unwrap();
        assert_eq!(m.embed_pre(&x).unwrap(), x);
        assert_eq!(m.embed_post(&x).unwrap(), x);
    }

    #[test]
    fn seeded_embeddings_are_bit_stable() {
        let arch = Architecture {
            input_dim: 3,
            pre_widths: vec![5, 4],
            post_widths: vec![],
            embedding_dim: 3,
            num_known: 2,
            num_dummy: 1,
        };
        let x = Matrix::from_rows(&[[0.1, -0.7, 1.3], [2.0, 0.0, -1.0]]).unwrap();
        let run = || {
            let mut m = SplitMlp::new(&arch, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
            let h = m.embed_pre(&x).unwrap();
            let e = m.embed_post(&h).unwrap();
            (h, e)
        };
        let (h1, e1) = run();
        let (h2, e2) = run();
        let bits = |m: &Matrix| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&h1), bits(&h2));
        assert_eq!(bits(&e1), bits(&e2));
    }

    #[test]
    fn single_dummy_fills_last_column() {
        let mut m = constant_model(&[1.0, 2.0], &[-0.25]);
        let l = m.augmented_logits(&one()).unwrap();
        assert_eq!(l.combined.data(), &[1.0, 2.0, -0.25]);
    }

    #[test]
    fn combined_takes_max_dummy() {
        let mut m = constant_model(&[1.0, 2.0, 3.0], &[0.5, 1.5]);
        let l = m.augmented_logits(&one()).unwrap();
        assert_eq!(l.combined.data(), &[1.0, 2.0, 3.0, 1.5]);
        assert_eq!(l.dummy_argmax, vec![1]);
        assert_eq!(l.combined.column_range(0, 3), l.closed);
    }

    #[test]
    fn duplicated_dummy_max_picks_lowest_index() {
        let m = constant_model(&[1.0, 2.0], &[0.7, 0.7, 0.1]);
        assert_eq!(m.infer_augmented(&one()).unwrap().dummy_argmax, vec![0]);
    }

    #[test]
    fn open_prediction_examples() {
        let mut m = constant_model(&[1.0, 2.0, 3.0], &[1.5]);
        m.calibration_bias = 2.0;
        assert_eq!(m.predict_open(&one()).unwrap(), vec![3]);
        m.calibration_bias = -10.0;
        assert_eq!(m.predict_open(&one()).unwrap(), vec![2]);

        let mut tie = constant_model(&[3.0, 1.0], &[1.0]);
        tie.calibration_bias = 2.0;
        assert_eq!(tie.predict_open(&one()).unwrap(), vec![0]);
    }

    #[test]
    fn knownness_examples() {
        let mut m = constant_model(&[1.0, 2.0, 3.0], &[1.5]);
        assert_eq!(m.knownness_score(&one()).unwrap(), vec![1.5]);
        m.calibration_bias = 0.75;
        assert_eq!(m.knownness_score(&one()).unwrap(), vec![0.75]);
    }

    #[test]
    fn knownness_not_invariant_to_closed_only_shift() {
        let m = constant_model(&[1.0, 2.0, 3.0], &[1.5]);
        let mut shifted = m.clone();
        for b in shifted.closed_head_mut().biases_mut() {
            *b += 1.0;
        }
        assert_ne!(
            m.knownness_score(&one()).unwrap(),
            shifted.knownness_score(&one()).unwrap()
        );
    }

    #[test]
    fn baseline_confidence_examples() {
        let m = constant_model(&[0.0, 0.0, 0.0, 0.0], &[5.0]);
        assert_eq!(m.baseline_confidence(&one()).unwrap(), vec![0.25]);
        let m = constant_model(&[10.0, -10.0], &[0.0]);
        let c = m.baseline_confidence(&one()).unwrap()[0];
        assert!((c - 0.999_999_997_938_846_4).abs() < 1e-15);
        assert!(c > 0.0 && c <= 1.0);
    }

    #[test]
    fn architecture_round_trips() {
        let arch = Architecture::new(4, 3, 5);
        let m = SplitMlp::new(&arch, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(m.architecture(), arch);
        assert_eq!(m.split_index(), 2);
        assert_eq!(m.num_dummy(), 5);
    }

    #[test]
    fn rejects_too_few_classes() {
        let arch = Architecture::new(2, 1, 1);
        assert!(SplitMlp::new(&arch, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let arch = Architecture::new(2, 2, 0);
        assert!(SplitMlp::new(&arch, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn flat_parameters_round_trip() {
        let arch = Architecture::new(3, 3, 2);
        let mut m = SplitMlp::new(&arch, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let p = m.flat_parameters();
        let mut q = p.clone();
        q[0] += 1.0;
        m.set_flat_parameters(&q).unwrap();
        assert_eq!(m.flat_parameters(), q);
        assert_eq!(p.len(), m.parameter_count());
        assert_eq!(Gradients::zeros_like(&m).flatten().len(), p.len());
    }
}
