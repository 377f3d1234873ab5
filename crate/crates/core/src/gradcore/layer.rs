use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, Shape};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Relu,
}

/// Parameter gradients of one [`DenseLayer`], shaped like its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl LayerGrads {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Matrix::zeros(inputs, outputs),
            biases: vec![0.0; outputs],
        }
    }

    pub fn add_scaled(&mut self, other: &LayerGrads, factor: f64) -> Result<()> {
        self.weights.add_scaled(&other.weights, factor)?;
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += factor * b;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct ForwardCache {
    input: Matrix,
    /// Pre-activation, kept only for relu layers.
    pre_activation: Option<Matrix>,
}

/// Affine map followed by an optional relu.
///
/// `forward` caches what `backward` needs; each `backward` consumes the cache of
/// the most recent `forward`, so the two must alternate.
#[derive(Clone, Debug)]
pub struct DenseLayer {
    weights: Matrix,
    biases: Vec<f64>,
    activation: Activation,
    cache: Option<ForwardCache>,
}

impl PartialEq for DenseLayer {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights
            && self.biases == other.biases
            && self.activation == other.activation
    }
}

impl DenseLayer {
    pub fn new(weights: Matrix, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        if biases.len() != weights.cols() {
            return Err(Error::dimension(
                "dense layer",
                weights.shape(),
                format!("{} biases", biases.len()),
            ));
        }
        Ok(Self {
            weights,
            biases,
            activation,
            cache: None,
        })
    }

    /// Zero-mean Gaussian weights with the given std and zero biases.
    pub fn gaussian<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        std: f64,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let normal = Normal::new(0.0, std).expect("finite nonnegative std");
        let data = (0..inputs * outputs).map(|_| normal.sample(rng)).collect();
        Self {
            weights: Matrix::from_vec(inputs, outputs, data).expect("sized"),
            biases: vec![0.0; outputs],
            activation,
            cache: None,
        }
    }

    /// He initialization for relu layers, Glorot-style `1/fan_in` variance otherwise.
    pub fn init<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let gain = match activation {
            Activation::Relu => 2.0,
            Activation::Linear => 1.0,
        };
        Self::gaussian(inputs, outputs, (gain / inputs as f64).sqrt(), activation, rng)
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    /// Weights and biases as flat mutable slices.
    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (self.weights.data_mut(), &mut self.biases)
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.data().len() + self.biases.len()
    }

    fn affine(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.inputs() {
            return Err(Error::dimension(
                "dense forward",
                input.shape(),
                self.weights.shape(),
            ));
        }
        let mut z = input.matmul(&self.weights)?;
        z.add_row_vector(&self.biases)?;
        Ok(z)
    }

    /// Forward pass without caching, for inference on a shared layer.
    pub fn infer(&self, input: &Matrix) -> Result<Matrix> {
        let z = self.affine(input)?;
        Ok(match self.activation {
            Activation::Linear => z,
            Activation::Relu => z.map(relu),
        })
    }

    pub fn forward(&mut self, input: &Matrix) -> Result<Matrix> {
        let z = self.affine(input)?;
        let (out, pre_activation) = match self.activation {
            Activation::Linear => (z, None),
            Activation::Relu => (z.map(relu), Some(z)),
        };
        self.cache = Some(ForwardCache {
            input: input.clone(),
            pre_activation,
        });
        Ok(out)
    }

    /// Backpropagates `grad_out` (gradient w.r.t. this layer's output) and
    /// returns the gradient w.r.t. the input together with parameter gradients.
    pub fn backward(&mut self, grad_out: &Matrix) -> Result<(Matrix, LayerGrads)> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| Error::State("dense backward called without a preceding forward".into()))?;
        if grad_out.rows() != cache.input.rows() || grad_out.cols() != self.outputs() {
            return Err(Error::dimension(
                "dense backward",
                grad_out.shape(),
                Shape(cache.input.rows(), self.outputs()),
            ));
        }
        let grad_z = match &cache.pre_activation {
            None => grad_out.clone(),
            Some(z) => {
                let mut g = grad_out.clone();
                for (gv, &zv) in g.data_mut().iter_mut().zip(z.data()) {
                    // subgradient 0 at exactly 0
                    if zv <= 0.0 {
                        *gv = 0.0;
                    }
                }
                g
            }
        };
        let grads = LayerGrads {
            weights: cache.input.t_matmul(&grad_z)?,
            biases: grad_z.column_sums(),
        };
        let grad_in = grad_z.matmul_t(&self.weights)?;
        Ok((grad_in, grads))
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }
}

#[inline]
fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}
