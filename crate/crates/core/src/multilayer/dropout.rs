use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::model::empirical_loss;
use crate::two_layer::DropoutPattern;

use super::params::MultilayerParams;

/// Kept neurons `A₁ … A_L`, one pattern per hidden layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DropoutPatternMl {
    pub layers: Vec<DropoutPattern>,
}

impl DropoutPatternMl {
    pub fn full(p: &MultilayerParams) -> Result<Self> {
        let layers = (1..=p.hidden()).map(|l| DropoutPattern::full(p.width(l))).collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    /// First `⌊N_ℓ/2⌋` neurons of every hidden layer.
    pub fn half(p: &MultilayerParams) -> Result<Self> {
        Self::fraction(p, 0.5)
    }

    /// First `⌈f·N_ℓ⌉` neurons of every hidden layer (`f = 0.5` gives `⌊N/2⌋`
    /// only for even widths; use [`DropoutPatternMl::half`] for the floor).
    pub fn fraction(p: &MultilayerParams, f: f64) -> Result<Self> {
        let layers = (1..=p.hidden())
            .map(|l| {
                let n = p.width(l);
                if f == 0.5 {
                    DropoutPattern::half(n)
                } else {
                    DropoutPattern::fraction(f, n)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }
}

/// For `k = 1 … L`, the pattern that keeps the first half of layers
/// `k … L` and every neuron of the layers below. These are the
/// sub-networks visited by [`super::build_path_ml`]; `k = 1` is the plain
/// half-dropout pattern.
pub fn nested_half_patterns(p: &MultilayerParams) -> Result<Vec<DropoutPatternMl>> {
    (1..=p.hidden())
        .map(|k| {
            let layers = (1..=p.hidden())
                .map(|l| if l >= k { DropoutPattern::half(p.width(l)) } else { DropoutPattern::full(p.width(l)) })
                .collect::<Result<_>>()?;
            Ok(DropoutPatternMl { layers })
        })
        .collect()
}

/// Sub-network on the kept neurons; every averaging prefactor becomes
/// `1/|A_ℓ|` of the layer it averages over.
pub fn dropout_ml(p: &MultilayerParams, pat: &DropoutPatternMl) -> Result<MultilayerParams> {
    if pat.layers.len() != p.hidden() {
        return Err(Error::shape("dropout pattern layers", p.hidden(), pat.layers.len()));
    }
    for (l, a) in pat.layers.iter().enumerate() {
        if a.n() != p.width(l + 1) {
            return Err(Error::shape("dropout pattern width", p.width(l + 1), a.n()));
        }
    }
    let w = p.weights();
    let last = w.len() - 1;
    let mut out = Vec::with_capacity(w.len());
    out.push(w[0].select_rows(pat.layers[0].kept()));
    for l in 1..last {
        out.push(w[l].select_rows(pat.layers[l].kept()).select_cols(pat.layers[l - 1].kept()));
    }
    out.push(w[last].select_cols(pat.layers[last - 1].kept()));
    MultilayerParams::new(out, p.activations().to_vec())
}

/// `|L(θ_S) − L(θ)|` on `ds`.
pub fn dropout_gap_ml(p: &MultilayerParams, pat: &DropoutPatternMl, ds: &LabeledDataset, loss: LossKind) -> Result<f64> {
    let full = empirical_loss(p, ds, loss)?;
    let sub = empirical_loss(&dropout_ml(p, pat)?, ds, loss)?;
    Ok((sub - full).abs())
}

/// Largest gap over [`nested_half_patterns`]: the dropout-stability level
/// the multilayer path bound is stated in terms of.
pub fn nested_gap_ml(p: &MultilayerParams, ds: &LabeledDataset, loss: LossKind) -> Result<f64> {
    let full = empirical_loss(p, ds, loss)?;
    let mut worst: f64 = 0.0;
    for pat in nested_half_patterns(p)? {
        let sub = empirical_loss(&dropout_ml(p, &pat)?, ds, loss)?;
        worst = worst.max((sub - full).abs());
    }
    Ok(worst)
}
