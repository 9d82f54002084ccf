use crate::data::{LabeledDataset, Sample, SampleStream};
use crate::error::{Error, Result};
use crate::model::{evaluate, Metrics, Network};
use crate::multilayer::{
    dropout_ml, nested_gap_ml, train_ml_observed, DropoutPatternMl, LayerTrainMask, MultilayerArch, MultilayerParams,
};
use crate::sgd::{SgdSchedule, TracePoint, Xi};
use crate::two_layer::{dropout2, train2_observed, AInit, DropoutPattern, TwoLayerInit, TwoLayerParams};

use super::checkpoint::{Checkpoint, CheckpointModel};
use super::config::{init_seed, ModelKind, RunConfig};
use super::task::Task;

/// Either network family, as configured by [`RunConfig::model`].
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    TwoLayer(TwoLayerParams),
    Multilayer(MultilayerParams),
}

impl Network for Model {
    fn input_dim(&self) -> usize {
        match self {
            Model::TwoLayer(p) => p.input_dim(),
            Model::Multilayer(p) => p.input_dim(),
        }
    }

    fn output_dim(&self) -> usize {
        match self {
            Model::TwoLayer(p) => p.output_dim(),
            Model::Multilayer(p) => p.output_dim(),
        }
    }

    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<Vec<f64>>> {
        match self {
            Model::TwoLayer(p) => p.predict_batch(batch),
            Model::Multilayer(p) => p.predict_batch(batch),
        }
    }
}

/// Full and dropout metrics of one network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropoutMetrics {
    pub full: Metrics,
    pub dropout: Metrics,
}

impl DropoutMetrics {
    /// `ε_D = |L_A − L|`.
    pub fn eps_d(&self) -> f64 {
        (self.dropout.loss - self.full.loss).abs()
    }
}

impl Model {
    /// Freshly initialized network of width `n` for run seed `seed`.
    pub fn init(cfg: &RunConfig, task: &Task, n: usize, seed: u64, a_init: AInit) -> Result<Model> {
        match cfg.model {
            ModelKind::TwoLayer => {
                let init = TwoLayerInit { a: a_init, w_std: cfg.w_std };
                let p = TwoLayerParams::init(n, task.input_dim(), task.out_dim(), cfg.activation, &init, init_seed(seed))?;
                Ok(Model::TwoLayer(p))
            }
            ModelKind::Multilayer => {
                let arch = MultilayerArch::uniform(task.input_dim(), n, cfg.hidden_layers, task.out_dim(), cfg.activation);
                Ok(Model::Multilayer(MultilayerParams::init(&arch, init_seed(seed))?))
            }
        }
    }

    pub fn from_checkpoint(c: &Checkpoint) -> Result<Model> {
        match &c.model {
            CheckpointModel::TwoLayer(p) => Ok(Model::TwoLayer(p.clone())),
            CheckpointModel::Multilayer(p) => Ok(Model::Multilayer(p.clone())),
            CheckpointModel::Ensemble(_) => {
                Err(Error::InvalidArgument("an ideal-particle ensemble is not a trainable network".into()))
            }
        }
    }

    pub fn to_checkpoint(&self, cfg: &RunConfig, seed: u64, step: u64) -> Checkpoint {
        match self {
            Model::TwoLayer(p) => Checkpoint::two_layer(p.clone(), seed, step, cfg.bias),
            Model::Multilayer(p) => Checkpoint {
                model: CheckpointModel::Multilayer(p.clone()),
                seed,
                step,
                input_bias: cfg.bias,
                mask: Some(LayerTrainMask::for_mode(cfg.mask, p.hidden())),
            },
        }
    }

    /// Hidden width (of the first hidden layer for multilayer nets).
    pub fn width(&self) -> usize {
        match self {
            Model::TwoLayer(p) => p.n(),
            Model::Multilayer(p) => p.width(1),
        }
    }

    /// The sub-network keeping the first `fraction` of every hidden layer
    /// (`⌊N/2⌋` neurons for one half).
    pub fn dropout(&self, fraction: f64) -> Result<Model> {
        match self {
            Model::TwoLayer(p) => {
                let pat = if fraction == 0.5 {
                    DropoutPattern::half(p.n())?
                } else {
                    DropoutPattern::fraction(fraction, p.n())?
                };
                Ok(Model::TwoLayer(dropout2(p, &pat)?))
            }
            Model::Multilayer(p) => Ok(Model::Multilayer(dropout_ml(p, &DropoutPatternMl::fraction(p, fraction)?)?)),
        }
    }

    pub fn dropout_metrics(&self, cfg: &RunConfig, ds: &LabeledDataset) -> Result<DropoutMetrics> {
        Ok(DropoutMetrics {
            full: evaluate(self, ds, cfg.loss)?,
            dropout: evaluate(&self.dropout(cfg.dropout_fraction)?, ds, cfg.loss)?,
        })
    }

    /// The `ε` that bounds the loss along the connecting path: the half
    /// dropout gap for two-layer nets, the largest nested half gap for
    /// multilayer ones.
    pub fn path_epsilon(&self, cfg: &RunConfig, ds: &LabeledDataset) -> Result<f64> {
        match self {
            Model::TwoLayer(_) => {
                let full = crate::model::empirical_loss(self, ds, cfg.loss)?;
                let half = crate::model::empirical_loss(&self.dropout(0.5)?, ds, cfg.loss)?;
                Ok((half - full).abs())
            }
            Model::Multilayer(p) => nested_gap_ml(p, ds, cfg.loss),
        }
    }
}

/// Outcome of [`train_model`].
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub steps: usize,
    pub trace: Vec<TracePoint>,
}

pub fn schedule(cfg: &RunConfig, n: usize, steps: usize) -> SgdSchedule {
    let mut sched = SgdSchedule::mean_field(cfg.alpha0, n, steps, cfg.batch);
    if cfg.xi != 1.0 {
        sched.xi = Xi::constant(cfg.xi);
    }
    sched
}

/// Train `init` for the configured number of steps on `stream`, calling
/// `observe(k, θ)` with the parameters after `k` steps for every `k` in
/// `at` (values past the end are ignored).
pub fn train_model(
    cfg: &RunConfig,
    task: &Task,
    init: &Model,
    stream: &mut dyn SampleStream,
    at: &[usize],
    mut observe: impl FnMut(usize, &Model) -> Result<()>,
) -> Result<Trained> {
    let n = init.width();
    let steps = cfg.steps(n, cfg.epoch_len(task.train_size()));
    let sched = schedule(cfg, n, steps);
    match init {
        Model::TwoLayer(p) => {
            let out = train2_observed(p, stream, &sched, cfg.loss, |k, q| {
                if at.contains(&k) {
                    observe(k, &Model::TwoLayer(q.clone()))?;
                }
                Ok(())
            })?;
            Ok(Trained { model: Model::TwoLayer(out.params), steps, trace: out.trace })
        }
        Model::Multilayer(p) => {
            let mask = LayerTrainMask::for_mode(cfg.mask, p.hidden());
            let out = train_ml_observed(p, stream, &sched, &mask, cfg.loss, |k, q| {
                if at.contains(&k) {
                    observe(k, &Model::Multilayer(q.clone()))?;
                }
                Ok(())
            })?;
            Ok(Trained { model: Model::Multilayer(out.params), steps, trace: out.trace })
        }
    }
}
