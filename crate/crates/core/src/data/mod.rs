//! Samples, datasets and sample streams.

mod gaussian;
mod idx;
mod normalize;

pub use gaussian::{GaussianStream, GaussianTaskSpec};
pub use idx::{encode_idx_images, encode_idx_labels, load_idx, parse_idx, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use normalize::{normalize_zero_mean_unit_var, NormStats};

use crate::error::{Error, Result};
use crate::math::RngStream;

/// One labelled example. Binary tasks use a single ±1 target; multiclass
/// tasks use one-hot targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    /// Copy of the sample with the constant feature 1 appended to `x`.
    pub fn with_bias(&self) -> Sample {
        let mut x = Vec::with_capacity(self.x.len() + 1);
        x.extend_from_slice(&self.x);
        x.push(1.0);
        Sample { x, y: self.y.clone() }
    }

    /// Maps a ±1 scalar target to a two-class one-hot target
    /// (`-1 -> [1, 0]`, `+1 -> [0, 1]`). Other targets are returned as is.
    pub fn binary_to_one_hot(&self) -> Sample {
        if self.y.len() != 1 {
            return self.clone();
        }
        let y = if self.y[0] > 0.0 { vec![0.0, 1.0] } else { vec![1.0, 0.0] };
        Sample { x: self.x.clone(), y }
    }
}

/// Immutable, in-memory collection of samples sharing one input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    samples: Vec<Sample>,
    d: usize,
    classes: usize,
}

impl LabeledDataset {
    pub fn new(samples: Vec<Sample>, classes: usize) -> Result<Self> {
        let d = samples.first().map_or(0, |s| s.x.len());
        let out = samples.first().map_or(0, |s| s.y.len());
        for (i, s) in samples.iter().enumerate() {
            if s.x.len() != d {
                return Err(Error::shape("LabeledDataset", format!("d = {d}"), format!("sample {i} with d = {}", s.x.len())));
            }
            if s.y.len() != out {
                return Err(Error::shape("LabeledDataset", format!("target length {out}"), format!("sample {i} with {}", s.y.len())));
            }
        }
        Ok(Self { samples, d, classes })
    }

    /// Collect `count` samples from a stream.
    pub fn from_stream(stream: &mut dyn SampleStream, count: usize, classes: usize) -> Result<Self> {
        let samples = stream.take_batch(count)?;
        Self::new(samples, classes)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn out_dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.y.len())
    }

    pub fn map(&self, f: impl Fn(&Sample) -> Sample) -> Result<LabeledDataset> {
        LabeledDataset::new(self.samples.iter().map(f).collect(), self.classes)
    }

    pub fn with_bias(&self) -> LabeledDataset {
        LabeledDataset {
            samples: self.samples.iter().map(Sample::with_bias).collect(),
            d: self.d + 1,
            classes: self.classes,
        }
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }
}

/// Source of training samples consumed in order.
pub trait SampleStream {
    fn next_sample(&mut self) -> Option<Sample>;

    fn take_batch(&mut self, n: usize) -> Result<Vec<Sample>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            match self.next_sample() {
                Some(s) => out.push(s),
                None => return Err(Error::StreamExhausted { needed: n, got: out.len() }),
            }
        }
        Ok(out)
    }
}

impl<S: SampleStream + ?Sized> SampleStream for &mut S {
    fn next_sample(&mut self) -> Option<Sample> {
        (**self).next_sample()
    }
}

impl<S: SampleStream + ?Sized> SampleStream for Box<S> {
    fn next_sample(&mut self) -> Option<Sample> {
        (**self).next_sample()
    }
}

/// Passes a finite list of samples through once.
#[derive(Debug, Clone)]
pub struct VecStream {
    samples: std::vec::IntoIter<Sample>,
}

impl VecStream {
    pub fn new(samples: Vec<Sample>) -> Self {
        Self { samples: samples.into_iter() }
    }
}

impl SampleStream for VecStream {
    fn next_sample(&mut self) -> Option<Sample> {
        self.samples.next()
    }
}

/// Cycles through a finite dataset, reshuffling at the start of every epoch.
#[derive(Debug, Clone)]
pub struct EpochStream {
    data: LabeledDataset,
    order: Vec<usize>,
    pos: usize,
    rng: RngStream,
}

impl EpochStream {
    pub fn new(data: LabeledDataset, seed: u64) -> Self {
        let order = (0..data.len()).collect();
        Self {
            data,
            order,
            pos: usize::MAX,
            rng: RngStream::new(seed),
        }
    }
}

impl SampleStream for EpochStream {
    fn next_sample(&mut self) -> Option<Sample> {
        if self.data.is_empty() {
            return None;
        }
        if self.pos >= self.order.len() {
            self.rng.shuffle(&mut self.order);
            self.pos = 0;
        }
        let s = self.data.samples()[self.order[self.pos]].clone();
        self.pos += 1;
        Some(s)
    }
}

/// Applies a per-sample transform to another stream.
pub struct MapStream<S, F> {
    inner: S,
    f: F,
}

impl<S, F> MapStream<S, F>
where
    S: SampleStream,
    F: FnMut(Sample) -> Sample,
{
    pub fn new(inner: S, f: F) -> Self {
        Self { inner, f }
    }
}

impl<S, F> SampleStream for MapStream<S, F>
where
    S: SampleStream,
    F: FnMut(Sample) -> Sample,
{
    fn next_sample(&mut self) -> Option<Sample> {
        self.inner.next_sample().map(&mut self.f)
    }
}
