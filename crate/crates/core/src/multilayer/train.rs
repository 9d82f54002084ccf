use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::data::{Sample, SampleStream};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::math::DenseMatrix;
use crate::sgd::{check_step_size, SgdSchedule, TracePoint, TrainOutcome};

use super::params::MultilayerParams;

/// Gradient amplification applied to one weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerScale {
    Frozen,
    /// Step `s·N`.
    N,
    /// Step `s·N²`.
    N2,
}

impl LayerScale {
    fn factor(self, n: f64) -> Option<f64> {
        match self {
            LayerScale::Frozen => None,
            LayerScale::N => Some(n),
            LayerScale::N2 => Some(n * n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    /// First and last matrices frozen, middle ones ×N².
    Theory,
    /// Every matrix trained: first and last ×N, middle ×N².
    Experiment,
}

impl fmt::Display for MaskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskMode::Theory => "theory",
            MaskMode::Experiment => "experiment",
        })
    }
}

impl FromStr for MaskMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(MaskMode::Theory),
            "experiment" => Ok(MaskMode::Experiment),
            _ => Err(Error::InvalidArgument(format!("unknown mask mode `{s}` (expected theory or experiment)"))),
        }
    }
}

/// One [`LayerScale`] per weight matrix `W₁ … W_{L+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerTrainMask {
    pub scales: Vec<LayerScale>,
}

impl LayerTrainMask {
    pub fn for_mode(mode: MaskMode, hidden: usize) -> Self {
        let outer = match mode {
            MaskMode::Theory => LayerScale::Frozen,
            MaskMode::Experiment => LayerScale::N,
        };
        let mut scales = vec![outer];
        scales.extend(std::iter::repeat_n(LayerScale::N2, hidden.saturating_sub(1)));
        scales.push(outer);
        Self { scales }
    }

    pub fn frozen(hidden: usize) -> Self {
        Self { scales: vec![LayerScale::Frozen; hidden + 1] }
    }
}

/// Gradient of the batch-mean loss with respect to every weight matrix,
/// and that loss.
pub fn batch_gradient_ml(p: &MultilayerParams, batch: &[Sample], loss: LossKind) -> Result<(Vec<DenseMatrix>, f64)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let w = p.weights();
    let depth = w.len();
    let mut grads: Vec<DenseMatrix> = w.iter().map(|m| DenseMatrix::zeros(m.rows(), m.cols())).collect();
    let mut total = 0.0;
    for s in batch {
        if s.y.len() != p.d_out() {
            return Err(Error::shape("multilayer target", p.d_out(), s.y.len()));
        }
        let cache = p.forward_cached(&s.x)?;
        total += loss.value(&s.y, &cache.out);
        let mut delta = vec![0.0; p.d_out()];
        loss.output_grad(&s.y, &cache.out, &mut delta);
        // `delta` holds ∂ℓ/∂(pre-activation) of the current layer; the
        // output layer is linear.
        for l in (1..depth).rev() {
            let fan_in = w[l].cols() as f64;
            let inp = &cache.h[l - 1];
            let g = &mut grads[l];
            for (i, &di) in delta.iter().enumerate() {
                if di == 0.0 {
                    continue;
                }
                let c = di / fan_in;
                for (gv, &hv) in g.row_mut(i).iter_mut().zip(inp) {
                    *gv += c * hv;
                }
            }
            let mut back = vec![0.0; w[l].cols()];
            for (i, &di) in delta.iter().enumerate() {
                if di == 0.0 {
                    continue;
                }
                for (bv, &wv) in back.iter_mut().zip(w[l].row(i)) {
                    *bv += wv * di;
                }
            }
            let act = p.activations()[l - 1];
            delta = back
                .iter()
                .zip(&cache.u[l - 1])
                .map(|(b, &u)| b / fan_in * act.grad(u))
                .collect();
        }
        let g1 = &mut grads[0];
        for (i, &di) in delta.iter().enumerate() {
            if di == 0.0 {
                continue;
            }
            for (gv, &xv) in g1.row_mut(i).iter_mut().zip(&s.x) {
                *gv += di * xv;
            }
        }
    }
    let inv = 1.0 / batch.len() as f64;
    for g in &mut grads {
        g.scale(inv);
    }
    Ok((grads, total * inv))
}

/// One SGD step in place: every non-frozen matrix moves by
/// `−s·factor·∇`, with factor `N` or `N²` per the mask. Returns the batch
/// loss before the update.
pub fn sgd_step_ml(p: &mut MultilayerParams, batch: &[Sample], step_size: f64, mask: &LayerTrainMask, loss: LossKind) -> Result<f64> {
    check_step_size(step_size)?;
    if mask.scales.len() != p.weights().len() {
        return Err(Error::shape("layer mask", p.weights().len(), mask.scales.len()));
    }
    let n = p
        .uniform_width()
        .ok_or_else(|| Error::InvalidArgument("multilayer SGD needs equal hidden widths".into()))? as f64;
    if mask.scales.iter().all(|s| *s == LayerScale::Frozen) {
        return crate::model::batch_loss(p, batch, loss);
    }
    let (grads, l) = batch_gradient_ml(p, batch, loss)?;
    if !l.is_finite() || grads.iter().zip(&mask.scales).any(|(g, s)| *s != LayerScale::Frozen && !g.all_finite()) {
        return Err(Error::NonFinite { what: "gradient", step: 0 });
    }
    for ((wm, g), scale) in p.weights_mut().iter_mut().zip(&grads).zip(&mask.scales) {
        if let Some(f) = scale.factor(n) {
            let lr = step_size * f;
            for (v, gv) in wm.data_mut().iter_mut().zip(g.data()) {
                *v -= lr * gv;
            }
        }
    }
    Ok(l)
}

pub fn train_ml(
    init: &MultilayerParams,
    stream: &mut dyn SampleStream,
    sched: &SgdSchedule,
    mask: &LayerTrainMask,
    loss: LossKind,
) -> Result<TrainOutcome<MultilayerParams>> {
    train_ml_observed(init, stream, sched, mask, loss, |_, _| Ok(()))
}

/// Like [`train_ml`], calling `observe(k, θ)` after every step (and at
/// `k = 0`).
pub fn train_ml_observed(
    init: &MultilayerParams,
    stream: &mut dyn SampleStream,
    sched: &SgdSchedule,
    mask: &LayerTrainMask,
    loss: LossKind,
    mut observe: impl FnMut(usize, &MultilayerParams) -> Result<()>,
) -> Result<TrainOutcome<MultilayerParams>> {
    sched.validate()?;
    let mut p = init.clone();
    let mut trace = Vec::new();
    let (mut window_sum, mut window_len) = (0.0, 0usize);
    observe(0, &p)?;
    for k in 0..sched.steps {
        let s = sched.step_size(k)?;
        let batch = stream.take_batch(sched.batch)?;
        let l = sgd_step_ml(&mut p, &batch, s, mask, loss).map_err(|e| match e {
            Error::NonFinite { what, .. } => Error::NonFinite { what, step: k },
            other => other,
        })?;
        window_sum += l;
        window_len += 1;
        let done = k + 1;
        if sched.log_every > 0 && (done % sched.log_every == 0 || done == sched.steps) {
            let mean = window_sum / window_len as f64;
            trace.push(TracePoint { step: done, t: done as f64 * sched.alpha, batch_loss: mean });
            log::debug!("step {done}: mean batch loss {mean:.6}");
            (window_sum, window_len) = (0.0, 0);
        }
        observe(done, &p)?;
    }
    Ok(TrainOutcome { params: p, trace })
}
