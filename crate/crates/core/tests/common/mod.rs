#![allow(dead_code)]

use osr_core::gradcore::{finite_difference_gradients, relative_error, Matrix};
use osr_core::placeholders::LossOutput;
use osr_core::network::{Architecture, SplitMlp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// D=3, K=3, C=2 with one hidden layer on each side of the split.
pub fn small_arch() -> Architecture {
    Architecture {
        input_dim: 3,
        pre_widths: vec![6],
        post_widths: vec![5],
        embedding_dim: 4,
        num_known: 3,
        num_dummy: 2,
    }
}

/// Freshly initialized, then every parameter jittered so biases are nonzero and
/// no ReLU input sits exactly on the kink.
pub fn small_model(seed: u64) -> SplitMlp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = SplitMlp::new(&small_arch(), &mut rng).unwrap();
    let jittered: Vec<f64> = model
        .flat_parameters()
        .iter()
        .map(|p| p + rng.random_range(-0.1..0.1))
        .collect();
    model.set_flat_parameters(&jittered).unwrap();
    model
}

pub fn random_batch(rng: &mut ChaCha8Rng, rows: usize, dim: usize, classes: usize) -> (Matrix, Vec<usize>) {
    let data = (0..rows * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let labels = (0..rows).map(|_| rng.random_range(0..classes)).collect();
    (Matrix::from_vec(rows, dim, data).unwrap(), labels)
}

pub const TOLERANCE: f64 = 1e-4;

/// Relative error between the analytic gradient returned by `loss` and
/// central differences over every parameter.
pub fn gradient_error<F>(model: &SplitMlp, mut loss: F) -> f64
where
    F: FnMut(&mut SplitMlp) -> LossOutput,
{
    let analytic = loss(&mut model.clone()).grads.flatten();
    let params = model.flat_parameters();
    let numeric = finite_difference_gradients(
        |p| {
            let mut m = model.clone();
            m.set_flat_parameters(p).unwrap();
            loss(&mut m).loss
        },
        &params,
        1e-6,
    );
    relative_error(&analytic, &numeric)
}
