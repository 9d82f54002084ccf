use super::{LabeledDataset, Sample};
use crate::error::{Error, Result};

/// Per-coordinate mean and standard deviation (population, divide by n).
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn fit(ds: &LabeledDataset) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = ds.len() as f64;
        let d = ds.d();
        let mut mean = vec![0.0; d];
        for s in ds.samples() {
            for (m, v) in mean.iter_mut().zip(&s.x) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for s in ds.samples() {
            for ((acc, v), m) in var.iter_mut().zip(&s.x).zip(&mean) {
                let c = v - m;
                *acc += c * c;
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Ok(Self { mean, std })
    }

    /// `(x - mean) / std`; zero-variance coordinates map to 0.
    pub fn apply_sample(&self, s: &Sample) -> Sample {
        let x = s
            .x
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &sd))| if sd > 0.0 { (v - m) / sd } else { 0.0 })
            .collect();
        Sample { x, y: s.y.clone() }
    }

    pub fn apply(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        if ds.d() != self.mean.len() {
            return Err(Error::shape("NormStats::apply", self.mean.len(), ds.d()));
        }
        ds.map(|s| self.apply_sample(s))
    }
}

/// Standardize every input coordinate over the dataset and return the
/// statistics so held-out data can be transformed identically.
pub fn normalize_zero_mean_unit_var(ds: &LabeledDataset) -> Result<(LabeledDataset, NormStats)> {
    let stats = NormStats::fit(ds)?;
    let out = stats.apply(ds)?;
    Ok((out, stats))
}
