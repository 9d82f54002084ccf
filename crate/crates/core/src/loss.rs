//! Per-sample losses, their output gradients and 0-1 error.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    /// `‖y − ŷ‖²`
    #[serde(rename = "square")]
    Square,
    /// Softmax cross-entropy over the output vector.
    #[serde(rename = "xent", alias = "cross-entropy")]
    CrossEntropy,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Square => "square",
            LossKind::CrossEntropy => "xent",
        }
    }

    pub fn value(self, y: &[f64], yhat: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), yhat.len());
        match self {
            LossKind::Square => {
                let mut acc = 0.0;
                for (t, p) in y.iter().zip(yhat) {
                    let r = t - p;
                    acc += r * r;
                }
                acc
            }
            LossKind::CrossEntropy => {
                let lse = log_sum_exp(yhat);
                let mut acc = 0.0;
                for (t, p) in y.iter().zip(yhat) {
                    acc -= t * (p - lse);
                }
                acc
            }
        }
    }

    /// Writes `∂ loss / ∂ ŷ` into `out`.
    pub fn output_grad(self, y: &[f64], yhat: &[f64], out: &mut [f64]) {
        match self {
            LossKind::Square => {
                for ((o, t), p) in out.iter_mut().zip(y).zip(yhat) {
                    *o = -2.0 * (t - p);
                }
            }
            LossKind::CrossEntropy => {
                let lse = log_sum_exp(yhat);
                let ysum: f64 = y.iter().sum();
                for ((o, t), p) in out.iter_mut().zip(y).zip(yhat) {
                    *o = ysum * (p - lse).exp() - t;
                }
            }
        }
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" | "mse" => Ok(LossKind::Square),
            "xent" | "cross-entropy" | "crossentropy" => Ok(LossKind::CrossEntropy),
            other => Err(format!("unknown loss `{other}` (expected square or xent)")),
        }
    }
}

/// Sign mismatch for scalar ±1 targets (`ŷ·y ≤ 0` counts as an error),
/// argmax mismatch otherwise.
pub fn is_misclassified(y: &[f64], yhat: &[f64]) -> bool {
    if y.len() == 1 {
        return yhat[0] * y[0] <= 0.0;
    }
    argmax(yhat) != argmax(y)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
