use crate::error::{Error, Result};

/// SGD with heavy-ball momentum: `v ← μ·v + g`, `w ← w − lr·v`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumState {
    velocity: Vec<Vec<f64>>,
    momentum: f64,
    learning_rate: f64,
}

impl MomentumState {
    /// One zero velocity buffer per parameter tensor, sized by `lengths`.
    pub fn new(lengths: &[usize], momentum: f64, learning_rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::Domain(format!("momentum {momentum} outside [0, 1)")));
        }
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::Domain(format!(
                "learning rate {learning_rate} must be positive"
            )));
        }
        Ok(Self {
            velocity: lengths.iter().map(|&n| vec![0.0; n]).collect(),
            momentum,
            learning_rate,
        })
    }

    pub fn velocity(&self) -> &[Vec<f64>] {
        &self.velocity
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }
}

/// Applies one momentum step to every parameter tensor in place.
pub fn sgd_momentum_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut MomentumState,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.velocity.len() {
        return Err(Error::dimension(
            "sgd_momentum_step",
            format!("{} parameter tensors", params.len()),
            format!("{} gradients, {} velocities", grads.len(), state.velocity.len()),
        ));
    }
    for (i, ((p, g), v)) in params.iter().zip(grads).zip(&state.velocity).enumerate() {
        if p.len() != g.len() || p.len() != v.len() {
            return Err(Error::dimension(
                "sgd_momentum_step",
                format!("tensor {i} has {} values", p.len()),
                format!("gradient {} / velocity {}", g.len(), v.len()),
            ));
        }
    }
    let (mu, lr) = (state.momentum, state.learning_rate);
    for ((p, g), v) in params.iter_mut().zip(grads).zip(state.velocity.iter_mut()) {
        for ((w, &gi), vi) in p.iter_mut().zip(g.iter()).zip(v.iter_mut()) {
            *vi = mu * *vi + gi;
            *w -= lr * *vi;
        }
    }
    Ok(())
}
