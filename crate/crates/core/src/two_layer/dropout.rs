use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::model::empirical_loss;

use super::params::TwoLayerParams;

/// Strictly increasing, nonempty subset of `0..n` naming the neurons kept
/// by a dropout network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropoutPattern {
    kept: Vec<usize>,
    n: usize,
}

impl DropoutPattern {
    pub fn new(kept: Vec<usize>, n: usize) -> Result<Self> {
        if kept.is_empty() {
            return Err(Error::InvalidArgument("dropout pattern must keep at least one neuron".into()));
        }
        if kept.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("dropout pattern must be strictly increasing".into()));
        }
        if let Some(&last) = kept.last() {
            if last >= n {
                return Err(Error::InvalidArgument(format!("dropout index {last} out of range for width {n}")));
            }
        }
        Ok(Self { kept, n })
    }

    /// Keeps neurons `0..k`.
    pub fn first(k: usize, n: usize) -> Result<Self> {
        Self::new((0..k).collect(), n)
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::first(n, n)
    }

    /// First `⌊N/2⌋` neurons.
    pub fn half(n: usize) -> Result<Self> {
        Self::first(n / 2, n)
    }

    /// First `⌈fraction·N⌉` neurons, `fraction ∈ (0, 1]`.
    pub fn fraction(fraction: f64, n: usize) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!("dropout fraction must lie in (0, 1], got {fraction}")));
        }
        let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
        Self::first(k, n)
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    /// Width of the network the pattern applies to.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_full(&self) -> bool {
        self.kept.len() == self.n
    }
}

/// Sub-network keeping the neurons of `pat`, averaged with `1/|A|`.
pub fn dropout2(p: &TwoLayerParams, pat: &DropoutPattern) -> Result<TwoLayerParams> {
    if pat.n() != p.n() {
        return Err(Error::shape("dropout pattern width", p.n(), pat.n()));
    }
    TwoLayerParams::new(p.a().select_rows(pat.kept()), p.w().select_rows(pat.kept()), p.activation())
}

/// `|L(θ_A) − L(θ)|` on `ds`.
pub fn dropout_gap2(p: &TwoLayerParams, pat: &DropoutPattern, ds: &LabeledDataset, loss: LossKind) -> Result<f64> {
    let full = empirical_loss(p, ds, loss)?;
    let sub = empirical_loss(&dropout2(p, pat)?, ds, loss)?;
    Ok((sub - full).abs())
}
