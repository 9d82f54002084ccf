//! Versioned JSON checkpoints. Floats are written in shortest round-trip
//! form, so save → load reproduces every parameter bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Activation, DenseMatrix};
use crate::meanfield::ParticleEnsemble;
use crate::multilayer::{LayerScale, LayerTrainMask, MultilayerParams};
use crate::two_layer::TwoLayerParams;

pub const CHECKPOINT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointModel {
    TwoLayer(TwoLayerParams),
    Multilayer(MultilayerParams),
    Ensemble(ParticleEnsemble),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: CheckpointModel,
    /// Run seed the parameters were derived from.
    pub seed: u64,
    /// SGD (or Euler) steps taken.
    pub step: u64,
    /// Whether inputs get a constant-1 feature appended before the model.
    pub input_bias: bool,
    /// Per-matrix training mask (multilayer only).
    pub mask: Option<LayerTrainMask>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", deny_unknown_fields)]
enum Doc {
    #[serde(rename = "two-layer")]
    TwoLayer {
        format_version: u64,
        n: usize,
        d: usize,
        out_dim: usize,
        activation: Activation,
        input_bias: bool,
        a: Vec<Vec<f64>>,
        w: Vec<Vec<f64>>,
        seed: u64,
        step: u64,
    },
    #[serde(rename = "multilayer")]
    Multilayer {
        format_version: u64,
        #[serde(rename = "L")]
        hidden: usize,
        n: usize,
        d_in: usize,
        d_out: usize,
        activations: Vec<Activation>,
        input_bias: bool,
        weights: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        mask: Option<Vec<LayerScale>>,
        seed: u64,
        step: u64,
    },
    #[serde(rename = "ideal-ensemble")]
    Ensemble {
        format_version: u64,
        m: usize,
        d: usize,
        out_dim: usize,
        activation: Activation,
        input_bias: bool,
        a: Vec<Vec<f64>>,
        w: Vec<Vec<f64>>,
        t: f64,
        seed: u64,
        step: u64,
    },
}

fn shape_err(msg: impl Into<String>) -> Error {
    Error::CheckpointShape(msg.into())
}

fn matrix(rows: &[Vec<f64>], r: usize, c: usize, name: &str) -> Result<DenseMatrix> {
    if rows.len() != r {
        return Err(shape_err(format!("`{name}` has {} rows, header says {r}", rows.len())));
    }
    if let Some(i) = rows.iter().position(|row| row.len() != c) {
        return Err(shape_err(format!("`{name}` row {i} has {} entries, expected {c}", rows[i].len())));
    }
    DenseMatrix::from_vec(r, c, rows.concat()).map_err(|e| shape_err(e.to_string()))
}

impl Checkpoint {
    pub fn two_layer(p: TwoLayerParams, seed: u64, step: u64, input_bias: bool) -> Self {
        Self { model: CheckpointModel::TwoLayer(p), seed, step, input_bias, mask: None }
    }

    pub fn to_json_string(&self) -> Result<String> {
        let doc = match &self.model {
            CheckpointModel::TwoLayer(p) => {
                if !(p.a().all_finite() && p.w().all_finite()) {
                    return Err(Error::InvalidArgument("cannot checkpoint non-finite parameters".into()));
                }
                Doc::TwoLayer {
                    format_version: CHECKPOINT_VERSION,
                    n: p.n(),
                    d: p.d(),
                    out_dim: p.out_dim(),
                    activation: p.activation(),
                    input_bias: self.input_bias,
                    a: p.a().to_rows(),
                    w: p.w().to_rows(),
                    seed: self.seed,
                    step: self.step,
                }
            }
            CheckpointModel::Multilayer(p) => {
                if !p.weights().iter().all(DenseMatrix::all_finite) {
                    return Err(Error::InvalidArgument("cannot checkpoint non-finite parameters".into()));
                }
                let n = p.uniform_width().ok_or_else(|| {
                    Error::InvalidArgument("checkpoints need equal hidden widths".into())
                })?;
                Doc::Multilayer {
                    format_version: CHECKPOINT_VERSION,
                    hidden: p.hidden(),
                    n,
                    d_in: p.d_in(),
                    d_out: p.d_out(),
                    activations: p.activations().to_vec(),
                    input_bias: self.input_bias,
                    weights: p.weights().iter().map(DenseMatrix::to_rows).collect(),
                    mask: self.mask.as_ref().map(|m| m.scales.clone()),
                    seed: self.seed,
                    step: self.step,
                }
            }
            CheckpointModel::Ensemble(e) => {
                if !(e.a.all_finite() && e.w.all_finite() && e.t.is_finite()) {
                    return Err(Error::InvalidArgument("cannot checkpoint non-finite parameters".into()));
                }
                Doc::Ensemble {
                    format_version: CHECKPOINT_VERSION,
                    m: e.m(),
                    d: e.d(),
                    out_dim: e.out_dim(),
                    activation: e.activation,
                    input_bias: self.input_bias,
                    a: e.a.to_rows(),
                    w: e.w.to_rows(),
                    t: e.t,
                    seed: self.seed,
                    step: self.step,
                }
            }
        };
        Ok(serde_json::to_string(&doc).expect("checkpoint documents always serialize"))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedCheckpoint(e.to_string()))?;
        let version = value
            .get("format_version")
            .ok_or_else(|| Error::MalformedCheckpoint("missing `format_version`".into()))?;
        let version = version
            .as_u64()
            .ok_or_else(|| Error::MalformedCheckpoint(format!("`format_version` must be an integer, got {version}")))?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::VersionMismatch { found: version, expected: CHECKPOINT_VERSION });
        }
        let doc: Doc = serde_json::from_value(value).map_err(|e| Error::MalformedCheckpoint(e.to_string()))?;
        match doc {
            Doc::TwoLayer { n, d, out_dim, activation, input_bias, a, w, seed, step, .. } => {
                let a = matrix(&a, n, out_dim, "a")?;
                let w = matrix(&w, n, d, "w")?;
                let p = TwoLayerParams::new(a, w, activation).map_err(|e| shape_err(e.to_string()))?;
                Ok(Self::two_layer(p, seed, step, input_bias))
            }
            Doc::Multilayer { hidden, n, d_in, d_out, activations, input_bias, weights, mask, seed, step, .. } => {
                if hidden == 0 || weights.len() != hidden + 1 {
                    return Err(shape_err(format!("{} weight matrices for L = {hidden}", weights.len())));
                }
                if activations.len() != hidden {
                    return Err(shape_err(format!("{} activations for L = {hidden}", activations.len())));
                }
                let mut mats = Vec::with_capacity(weights.len());
                for (k, rows) in weights.iter().enumerate() {
                    let cols = if k == 0 { d_in } else { n };
                    let r = if k == hidden { d_out } else { n };
                    mats.push(matrix(rows, r, cols, &format!("weights[{k}]"))?);
                }
                let mask = match mask {
                    Some(scales) if scales.len() != hidden + 1 => {
                        return Err(shape_err(format!("mask has {} entries for {} matrices", scales.len(), hidden + 1)));
                    }
                    other => other.map(|scales| LayerTrainMask { scales }),
                };
                let p = MultilayerParams::new(mats, activations).map_err(|e| shape_err(e.to_string()))?;
                Ok(Self { model: CheckpointModel::Multilayer(p), seed, step, input_bias, mask })
            }
            Doc::Ensemble { m, d, out_dim, activation, input_bias, a, w, t, seed, step, .. } => {
                if m == 0 {
                    return Err(shape_err("ensemble with no particles"));
                }
                if !(t >= 0.0) {
                    return Err(shape_err(format!("ensemble time {t} is negative")));
                }
                let a = matrix(&a, m, out_dim, "a")?;
                let w = matrix(&w, m, d, "w")?;
                let e = ParticleEnsemble { a, w, activation, t };
                Ok(Self { model: CheckpointModel::Ensemble(e), seed, step, input_bias, mask: None })
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = self.to_json_string()?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }
}
