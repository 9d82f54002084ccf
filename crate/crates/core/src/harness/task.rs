use crate::data::{
    load_idx, EpochStream, GaussianTaskSpec, LabeledDataset, MapStream, NormStats, Sample, SampleStream,
};
use crate::error::Result;
use crate::loss::LossKind;

use super::config::{data_seed, RunConfig, TaskKind};

/// Training source plus the fixed evaluation set of a run.
#[derive(Debug, Clone)]
pub struct Task {
    source: Source,
    eval: LabeledDataset,
    bias: bool,
    one_hot: bool,
}

#[derive(Debug, Clone)]
enum Source {
    Gaussian(GaussianTaskSpec),
    /// Already normalized, with bias appended if requested.
    Fixed(LabeledDataset),
}

impl Task {
    pub fn load(cfg: &RunConfig) -> Result<Task> {
        let one_hot = cfg.loss == LossKind::CrossEntropy;
        match cfg.task {
            TaskKind::Gaussian => {
                let spec = GaussianTaskSpec { d: cfg.gaussian.d, delta: cfg.gaussian.delta, seed: cfg.eval_seed };
                let mut stream = spec.stream()?;
                let raw = LabeledDataset::from_stream(&mut stream, cfg.eval_size, 2)?;
                let eval = raw.map(|s| prepare(s, cfg.bias, one_hot))?;
                Ok(Task { source: Source::Gaussian(spec), eval, bias: cfg.bias, one_hot })
            }
            TaskKind::Idx => {
                let idx = &cfg.idx;
                let mut train = load_idx(&idx.resolve(&idx.train_images), &idx.resolve(&idx.train_labels))?;
                if idx.train_limit > 0 && idx.train_limit < train.len() {
                    let classes = train.classes();
                    let mut s = train.into_samples();
                    s.truncate(idx.train_limit);
                    train = LabeledDataset::new(s, classes)?;
                }
                let test = load_idx(&idx.resolve(&idx.test_images), &idx.resolve(&idx.test_labels))?;
                let stats = NormStats::fit(&train)?;
                let bias = cfg.bias;
                let train = stats.apply(&train)?.map(|s| prepare(s, bias, false))?;
                let eval = stats.apply(&test)?.map(|s| prepare(s, bias, false))?;
                Ok(Task { source: Source::Fixed(train), eval, bias, one_hot })
            }
        }
    }

    pub fn eval(&self) -> &LabeledDataset {
        &self.eval
    }

    pub fn input_dim(&self) -> usize {
        self.eval.d()
    }

    pub fn out_dim(&self) -> usize {
        self.eval.out_dim()
    }

    /// Training-set size for finite data.
    pub fn train_size(&self) -> Option<usize> {
        match &self.source {
            Source::Gaussian(_) => None,
            Source::Fixed(ds) => Some(ds.len()),
        }
    }

    /// Training samples for run seed `seed`, as seen by the model.
    pub fn train_stream(&self, seed: u64) -> Result<Box<dyn SampleStream + Send>> {
        self.stream_with(data_seed(seed))
    }

    /// Training samples from an explicit stream seed.
    pub fn stream_with(&self, stream_seed: u64) -> Result<Box<dyn SampleStream + Send>> {
        Ok(match &self.source {
            Source::Gaussian(spec) => {
                let spec = GaussianTaskSpec { seed: stream_seed, ..*spec };
                let (bias, one_hot) = (self.bias, self.one_hot);
                Box::new(MapStream::new(spec.stream()?, move |s: Sample| prepare(&s, bias, one_hot)))
            }
            Source::Fixed(ds) => Box::new(EpochStream::new(ds.clone(), stream_seed)),
        })
    }
}

fn prepare(s: &Sample, bias: bool, one_hot: bool) -> Sample {
    let s = if one_hot { s.binary_to_one_hot() } else { s.clone() };
    if bias {
        s.with_bias()
    } else {
        s
    }
}
