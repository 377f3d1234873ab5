//! Dense matrices, layers with explicit forward/backward, losses, the momentum
//! optimizer, Beta sampling and a finite-difference gradient oracle.

pub mod gradcheck;
pub mod layer;
pub mod loss;
pub mod matrix;
pub mod optim;
pub mod sampling;

pub use gradcheck::{finite_difference_gradients, relative_error};
pub use layer::{Activation, DenseLayer, LayerGrads};
pub use loss::{cross_entropy_from_logits, logsumexp, softmax_rows, CrossEntropy};
pub use matrix::{argmax, Matrix};
pub use optim::{sgd_momentum_step, MomentumState};
pub use sampling::{beta_sample, SymmetricBeta};
