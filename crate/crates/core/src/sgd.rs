//! Step-size schedules shared by the SGD trainers and the ideal-particle
//! integrator.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time profile ξ of the step size, `s_k = α ξ(kα)`. Must be positive.
#[derive(Clone)]
pub struct Xi {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
}

impl Xi {
    pub fn constant(c: f64) -> Self {
        Self {
            f: Arc::new(move |_| c),
            label: format!("constant({c})"),
        }
    }

    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

impl Default for Xi {
    fn default() -> Self {
        Xi::constant(1.0)
    }
}

impl fmt::Debug for Xi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Xi({})", self.label)
    }
}

#[derive(Debug, Clone)]
pub struct SgdSchedule {
    /// Base step α.
    pub alpha: f64,
    pub xi: Xi,
    /// Number of SGD steps k_max.
    pub steps: usize,
    /// Minibatch size; the gradient is the batch mean.
    pub batch: usize,
    /// Record the batch loss every this many steps (0 disables the trace).
    pub log_every: usize,
}

impl SgdSchedule {
    pub fn new(alpha: f64, steps: usize, batch: usize) -> Self {
        Self {
            alpha,
            xi: Xi::default(),
            steps,
            batch,
            log_every: (steps / 100).max(1),
        }
    }

    /// `α = α₀ / N`, so that `T = steps · α` does not depend on the width
    /// when `steps` grows linearly in `N`.
    pub fn mean_field(alpha0: f64, width: usize, steps: usize, batch: usize) -> Self {
        Self::new(alpha0 / width as f64, steps, batch)
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.alpha
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.batch == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        if self.steps > 0 {
            self.step_size(0)?;
        }
        Ok(())
    }

    /// `s_k = α ξ(kα)`, rejected unless positive and finite.
    pub fn step_size(&self, k: usize) -> Result<f64> {
        let t = k as f64 * self.alpha;
        let xi = self.xi.at(t);
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidArgument(format!("xi({t}) = {xi} is not positive")));
        }
        Ok(self.alpha * xi)
    }
}

/// One entry of a training trace: the mean batch loss over the steps since
/// the previous entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub t: f64,
    pub batch_loss: f64,
}

/// Final parameters plus the periodic loss trace.
#[derive(Debug, Clone)]
pub struct TrainOutcome<P> {
    pub params: P,
    pub trace: Vec<TracePoint>,
}

pub(crate) fn check_step_size(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("step size must be positive and finite, got {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_is_width_independent() {
        let a = SgdSchedule::mean_field(2.0, 100, 1000, 1);
        let b = SgdSchedule::mean_field(2.0, 400, 4000, 1);
        assert!((a.horizon() - b.horizon()).abs() < 1e-12);
    }

    #[test]
    fn zero_xi_rejected() {
        let mut s = SgdSchedule::new(0.1, 10, 1);
        s.xi = Xi::constant(0.0);
        assert!(s.validate().is_err());
        s.xi = Xi::new("decay", |t| 1.0 / (1.0 + t));
        assert!(s.validate().is_ok());
        assert!((s.step_size(10).unwrap() - 0.1 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn bad_alpha_rejected() {
        assert!(SgdSchedule::new(0.0, 10, 1).validate().is_err());
        assert!(SgdSchedule::new(0.1, 10, 0).validate().is_err());
    }
}
