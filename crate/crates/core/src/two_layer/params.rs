use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::math::{Activation, DenseMatrix, RngStream};
use crate::model::Network;

/// Parameters θᵢ = (aᵢ, wᵢ) of an N-neuron two-layer network.
///
/// `a` is `N × out_dim` (row i is the output weight of neuron i) and `w`
/// is `N × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerParams {
    a: DenseMatrix,
    w: DenseMatrix,
    activation: Activation,
}

/// Distribution of the output weights at initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AInit {
    /// `aᵢ ~ Unif[-bound, bound]`.
    Uniform { bound: f64 },
    /// `aᵢ = ±Unif[lo, hi]` with a fair random sign.
    Bimodal { lo: f64, hi: f64 },
}

impl Default for AInit {
    fn default() -> Self {
        AInit::Uniform { bound: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoLayerInit {
    pub a: AInit,
    /// Standard deviation of each coordinate of wᵢ; `None` means `1/√d`.
    pub w_std: Option<f64>,
}

impl TwoLayerParams {
    pub fn new(a: DenseMatrix, w: DenseMatrix, activation: Activation) -> Result<Self> {
        if a.rows() != w.rows() {
            return Err(Error::shape("TwoLayerParams", format!("{} rows in a", w.rows()), a.rows()));
        }
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::InvalidArgument("two-layer network needs N >= 1 and out_dim >= 1".into()));
        }
        if !a.all_finite() || !w.all_finite() {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(Self { a, w, activation })
    }

    /// Scalar-output network from per-neuron `aᵢ` and rows `wᵢ`.
    pub fn from_scalar(a: Vec<f64>, w: Vec<Vec<f64>>, activation: Activation) -> Result<Self> {
        let n = a.len();
        let a = DenseMatrix::from_vec(n, 1, a)?;
        let w = DenseMatrix::from_rows(&w)?;
        Self::new(a, w, activation)
    }

    /// i.i.d. initialization. Neurons are drawn one after another from a
    /// single stream, so the first `n` neurons of a wider network coincide
    /// with a narrower network built from the same seed.
    pub fn init(n: usize, d: usize, out_dim: usize, activation: Activation, init: &TwoLayerInit, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 || out_dim == 0 {
            return Err(Error::InvalidArgument(format!("bad two-layer shape n={n} d={d} out_dim={out_dim}")));
        }
        let w_std = init.w_std.unwrap_or(1.0 / (d as f64).sqrt());
        let mut rng = RngStream::new(seed);
        let mut a = DenseMatrix::zeros(n, out_dim);
        let mut w = DenseMatrix::zeros(n, d);
        for i in 0..n {
            for v in a.row_mut(i) {
                *v = match init.a {
                    AInit::Uniform { bound } => rng.uniform(-bound, bound),
                    AInit::Bimodal { lo, hi } => {
                        let sign = rng.sign();
                        sign * rng.uniform(lo, hi)
                    }
                };
            }
            for v in w.row_mut(i) {
                *v = rng.gaussian(0.0, w_std);
            }
        }
        Self::new(a, w, activation)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.a.cols()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn w(&self) -> &DenseMatrix {
        &self.w
    }

    pub(crate) fn a_mut(&mut self) -> &mut DenseMatrix {
        &mut self.a
    }

    pub(crate) fn w_mut(&mut self) -> &mut DenseMatrix {
        &mut self.w
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix, Activation) {
        (self.a, self.w, self.activation)
    }

    pub fn same_shape(&self, other: &TwoLayerParams) -> bool {
        self.a.shape() == other.a.shape() && self.w.shape() == other.w.shape()
    }

    /// Network output for one input.
    pub fn forward2(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.predict(x)
    }

    pub(crate) fn check_input(&self, batch: &[Sample]) -> Result<()> {
        for s in batch {
            if s.x.len() != self.d() {
                return Err(Error::shape("two-layer input", self.d(), s.x.len()));
            }
        }
        Ok(())
    }
}

/// Pre-activations `u[b·N + i] = ⟨x_b, wᵢ⟩`, each summed over input
/// coordinates in index order (bit-identical to [`crate::math::dot`]).
pub(crate) fn preactivations(w: &DenseMatrix, batch: &[Sample]) -> Vec<f64> {
    let n = w.rows();
    let wt = w.transpose();
    let mut u = vec![0.0; batch.len() * n];
    for (b, s) in batch.iter().enumerate() {
        let ub = &mut u[b * n..(b + 1) * n];
        for (k, &xk) in s.x.iter().enumerate() {
            for (acc, &wki) in ub.iter_mut().zip(wt.row(k)) {
                *acc += wki * xk;
            }
        }
    }
    u
}

impl Network for TwoLayerParams {
    fn input_dim(&self) -> usize {
        self.d()
    }

    fn output_dim(&self) -> usize {
        self.out_dim()
    }

    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<Vec<f64>>> {
        self.check_input(batch)?;
        let n = self.n();
        let c = self.out_dim();
        let inv = n as f64;
        let u = preactivations(&self.w, batch);
        let mut out = Vec::with_capacity(batch.len());
        for b in 0..batch.len() {
            let mut y = vec![0.0; c];
            for i in 0..n {
                let s = self.activation.apply(u[b * n + i]);
                for (yc, &aic) in y.iter_mut().zip(self.a.row(i)) {
                    *yc += aic * s;
                }
            }
            for yc in &mut y {
                *yc /= inv;
            }
            out.push(y);
        }
        Ok(out)
    }
}
