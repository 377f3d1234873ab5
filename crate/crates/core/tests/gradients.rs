//! Analytic gradients of every training loss against central differences.

mod common;

use common::{gradient_error, random_batch, small_model, TOLERANCE};
use osr_core::gradcore::{finite_difference_gradients, relative_error, Matrix};
use osr_core::network::SplitMlp;
use osr_core::placeholders::{
    build_mix_pairs, loss_classifier_placeholder, loss_data_placeholder, mixed_hidden_loss, LossOutput,
    MixMode, MixPairs,
};
use osr_core::gradcore::SymmetricBeta;
use osr_core::network::Gradients;
use osr_core::trainer::closed_set_loss;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEEDS: u64 = 20;
const STEP: f64 = 1e-6;

fn check<F>(name: &str, model: &SplitMlp, loss: F)
where
    F: FnMut(&mut SplitMlp) -> LossOutput,
{
    let err = gradient_error(model, loss);
    assert!(err <= TOLERANCE, "{name}: relative error {err:e}");
}

fn pairs_for(labels: &[usize], rng: &mut ChaCha8Rng) -> MixPairs {
    let beta = SymmetricBeta::new(2.0).unwrap();
    loop {
        let pairs = build_mix_pairs(labels, &beta, rng).unwrap();
        if !pairs.is_empty() {
            return pairs;
        }
    }
}

#[test]
fn closed_set_cross_entropy() {
    for seed in 0..SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let (x, y) = random_batch(&mut rng, 8, 3, 3);
        check("ce", &small_model(seed), |m| closed_set_loss(m, &x, &y).unwrap());
    }
}

#[test]
fn classifier_placeholder_loss() {
    for beta in [0.0, 1.0] {
        for seed in 0..SEEDS {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let (x, y) = random_batch(&mut rng, 8, 3, 3);
            check(&format!("l1 beta={beta}"), &small_model(seed), |m| {
                loss_classifier_placeholder(m, &x, &y, beta).unwrap()
            });
        }
    }
}

#[test]
fn data_placeholder_loss() {
    for mode in [MixMode::Hidden, MixMode::Input] {
        for seed in 0..SEEDS {
            let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
            let (x, y) = random_batch(&mut rng, 8, 3, 3);
            let pairs = pairs_for(&y, &mut rng);
            check(&format!("l2 {mode:?}"), &small_model(seed), |m| {
                loss_data_placeholder(m, &x, &pairs, mode).unwrap()
            });
        }
    }
}

/// The gradient reaching each hidden row is λ (left) or 1−λ (right) times the
/// gradient at the mixed point, summed over the pairs it takes part in.
#[test]
fn mixed_gradient_splits_by_lambda() {
    for seed in 0..SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let model = small_model(seed);
        let (x, y) = random_batch(&mut rng, 6, 3, 3);
        let pairs = pairs_for(&y, &mut rng);
        let hidden = model.infer_pre(&x).unwrap();

        let loss_at = |h: &[f64]| {
            let mut m = model.clone();
            let mut g = Gradients::zeros_like(&m);
            let h = Matrix::from_vec(hidden.rows(), hidden.cols(), h.to_vec()).unwrap();
            mixed_hidden_loss(&mut m, &h, &pairs, &mut g).unwrap().0
        };
        let mut m = model.clone();
        let mut g = Gradients::zeros_like(&m);
        let (_, analytic) = mixed_hidden_loss(&mut m, &hidden, &pairs, &mut g).unwrap();
        let numeric = finite_difference_gradients(loss_at, hidden.data(), STEP);
        let err = relative_error(analytic.data(), &numeric);
        assert!(err <= TOLERANCE, "hidden gradient: {err:e}");
    }
}

#[test]
fn single_pair_left_gradient_is_lambda_scaled() {
    let model = small_model(5);
    let hidden = model.infer_pre(&Matrix::from_rows(&[[0.3, -1.0, 0.8], [1.2, 0.4, -0.6]]).unwrap()).unwrap();
    let lambda = 0.3;
    let pairs = MixPairs {
        left: vec![0],
        right: vec![1],
        lambda,
    };
    let mut m = model.clone();
    let mut g = Gradients::zeros_like(&m);
    let (_, grad_hidden) = mixed_hidden_loss(&mut m, &hidden, &pairs, &mut g).unwrap();
    for (a, b) in grad_hidden.row(0).iter().zip(grad_hidden.row(1)) {
        // both rows receive the same mixed gradient, scaled by λ and 1−λ
        assert!((a * (1.0 - lambda) - b * lambda).abs() < 1e-15);
    }
}
