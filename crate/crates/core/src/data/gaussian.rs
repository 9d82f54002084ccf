use serde::{Deserialize, Serialize};

use super::{Sample, SampleStream};
use crate::error::{Error, Result};
use crate::math::RngStream;

/// Two isotropic Gaussians with different scales: `y ~ Unif{-1, +1}`,
/// `x | y ~ N(0, (1 + yΔ)² I_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTaskSpec {
    pub d: usize,
    pub delta: f64,
    pub seed: u64,
}

impl Default for GaussianTaskSpec {
    fn default() -> Self {
        Self {
            d: 32,
            delta: 0.5,
            seed: 0,
        }
    }
}

impl GaussianTaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("gaussian task needs d >= 1".into()));
        }
        if !(self.delta > -1.0) || self.delta == 1.0 || !self.delta.is_finite() {
            // both class covariances (1 ± Δ)² must be positive
            return Err(Error::InvalidArgument(format!(
                "gaussian task needs delta > -1 and delta != 1, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn stream(&self) -> Result<GaussianStream> {
        self.validate()?;
        Ok(GaussianStream {
            spec: *self,
            rng: RngStream::new(self.seed),
        })
    }
}

/// Infinite deterministic stream for [`GaussianTaskSpec`].
#[derive(Debug, Clone)]
pub struct GaussianStream {
    spec: GaussianTaskSpec,
    rng: RngStream,
}

impl GaussianStream {
    pub fn draw(&mut self) -> Sample {
        let y = self.rng.sign();
        let std = (1.0 + y * self.spec.delta).abs();
        let x = (0..self.spec.d).map(|_| self.rng.gaussian(0.0, std)).collect();
        Sample { x, y: vec![y] }
    }
}

impl SampleStream for GaussianStream {
    fn next_sample(&mut self) -> Option<Sample> {
        Some(self.draw())
    }
}
