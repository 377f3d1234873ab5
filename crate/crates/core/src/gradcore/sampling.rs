use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};

/// Symmetric `Beta(alpha, alpha)` sampler.
#[derive(Clone, Copy, Debug)]
pub struct SymmetricBeta {
    alpha: f64,
    dist: Beta<f64>,
}

impl SymmetricBeta {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("Beta parameter {alpha} must be positive")));
        }
        let dist = Beta::new(alpha, alpha).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(Self { alpha, dist })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng).clamp(0.0, 1.0)
    }
}

/// One draw of `λ ~ Beta(alpha, alpha)`.
pub fn beta_sample<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    Ok(SymmetricBeta::new(alpha)?.sample(rng))
}
