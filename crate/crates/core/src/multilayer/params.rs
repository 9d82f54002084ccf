use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::math::{dot, Activation, DenseMatrix, RngStream};
use crate::model::Network;

/// Shape of a uniform-width multilayer network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilayerArch {
    pub d_in: usize,
    pub width: usize,
    /// Number of hidden layers L.
    pub hidden: usize,
    pub d_out: usize,
    /// One activation per hidden layer.
    pub activations: Vec<Activation>,
}

impl MultilayerArch {
    pub fn uniform(d_in: usize, width: usize, hidden: usize, d_out: usize, act: Activation) -> Self {
        Self { d_in, width, hidden, d_out, activations: vec![act; hidden] }
    }
}

/// Weights `W₁ … W_{L+1}`. `W₁` is `N₁ × d₀`, `W_{ℓ+1}` is `N_{ℓ+1} × N_ℓ`
/// and the output matrix is `d_out × N_L`. Every matrix after the first is
/// applied with the prefactor `1/(its column count)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerParams {
    weights: Vec<DenseMatrix>,
    activations: Vec<Activation>,
}

/// Pre-activations and activations of every hidden layer for one input.
#[derive(Debug, Clone)]
pub(crate) struct ForwardCache {
    pub u: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub out: Vec<f64>,
}

impl MultilayerParams {
    pub fn new(weights: Vec<DenseMatrix>, activations: Vec<Activation>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidArgument("a multilayer network needs at least one hidden layer".into()));
        }
        if activations.len() != weights.len() - 1 {
            return Err(Error::shape("activations", weights.len() - 1, activations.len()));
        }
        for (l, pair) in weights.windows(2).enumerate() {
            if pair[1].cols() != pair[0].rows() {
                return Err(Error::shape("layer chaining", format!("W{} with {} columns", l + 2, pair[0].rows()), pair[1].cols()));
            }
        }
        for w in &weights {
            if w.rows() == 0 || w.cols() == 0 {
                return Err(Error::InvalidArgument("empty weight matrix".into()));
            }
            if !w.all_finite() {
                return Err(Error::InvalidArgument("weights must be finite".into()));
            }
        }
        Ok(Self { weights, activations })
    }

    /// `W₁ ~ N(0, 1/d₀)` entries and `Unif[−1, 1]` entries elsewhere, drawn
    /// matrix by matrix in row-major order.
    pub fn init(arch: &MultilayerArch, seed: u64) -> Result<Self> {
        if arch.hidden == 0 || arch.width == 0 || arch.d_in == 0 || arch.d_out == 0 {
            return Err(Error::InvalidArgument(format!("bad multilayer architecture {arch:?}")));
        }
        let mut rng = RngStream::new(seed);
        let std = 1.0 / (arch.d_in as f64).sqrt();
        let mut weights = vec![DenseMatrix::from_fn(arch.width, arch.d_in, |_, _| rng.gaussian(0.0, std))];
        for _ in 1..arch.hidden {
            weights.push(DenseMatrix::from_fn(arch.width, arch.width, |_, _| rng.uniform(-1.0, 1.0)));
        }
        weights.push(DenseMatrix::from_fn(arch.d_out, arch.width, |_, _| rng.uniform(-1.0, 1.0)));
        Self::new(weights, arch.activations.clone())
    }

    /// Number of hidden layers L.
    pub fn hidden(&self) -> usize {
        self.activations.len()
    }

    /// Width of hidden layer `l` (1-based).
    pub fn width(&self, l: usize) -> usize {
        self.weights[l - 1].rows()
    }

    /// Common hidden width, if all hidden layers have the same width.
    pub fn uniform_width(&self) -> Option<usize> {
        let n = self.width(1);
        (1..=self.hidden()).all(|l| self.width(l) == n).then_some(n)
    }

    pub fn d_in(&self) -> usize {
        self.weights[0].cols()
    }

    pub fn d_out(&self) -> usize {
        self.weights[self.weights.len() - 1].rows()
    }

    pub fn weights(&self) -> &[DenseMatrix] {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [DenseMatrix] {
        &mut self.weights
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn arch(&self) -> Option<MultilayerArch> {
        Some(MultilayerArch {
            d_in: self.d_in(),
            width: self.uniform_width()?,
            hidden: self.hidden(),
            d_out: self.d_out(),
            activations: self.activations.clone(),
        })
    }

    pub fn same_shape(&self, other: &MultilayerParams) -> bool {
        self.weights.len() == other.weights.len() && self.weights.iter().zip(&other.weights).all(|(a, b)| a.shape() == b.shape())
    }

    pub(crate) fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.d_in() {
            return Err(Error::shape("multilayer input", self.d_in(), x.len()));
        }
        let mut u = Vec::with_capacity(self.hidden());
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(self.hidden());
        let w1 = &self.weights[0];
        let u1: Vec<f64> = (0..w1.rows()).map(|i| dot(w1.row(i), x)).collect();
        h.push(u1.iter().map(|&v| self.activations[0].apply(v)).collect());
        u.push(u1);
        for l in 1..self.hidden() {
            let ul = scaled_matvec(&self.weights[l], &h[l - 1]);
            h.push(ul.iter().map(|&v| self.activations[l].apply(v)).collect());
            u.push(ul);
        }
        let out = scaled_matvec(&self.weights[self.hidden()], &h[self.hidden() - 1]);
        Ok(ForwardCache { u, h, out })
    }

    /// Network output for one input.
    pub fn forward_ml(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(x)?.out)
    }
}

/// `(1/cols) W v`, each row summed in index order and then divided.
fn scaled_matvec(w: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    let fan_in = w.cols() as f64;
    (0..w.rows()).map(|i| dot(w.row(i), v) / fan_in).collect()
}

impl Network for MultilayerParams {
    fn input_dim(&self) -> usize {
        self.d_in()
    }

    fn output_dim(&self) -> usize {
        self.d_out()
    }

    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<Vec<f64>>> {
        batch.iter().map(|s| self.forward_ml(&s.x)).collect()
    }
}
