//! Behaviour shared by every network type: batched prediction and the
//! dataset-level metrics computed from it.

use crate::data::{LabeledDataset, Sample};
use crate::error::{Error, Result};
use crate::loss::{is_misclassified, LossKind};

/// Samples are evaluated in chunks of this size; results do not depend on it.
pub(crate) const EVAL_CHUNK: usize = 256;

pub trait Network {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    /// Predictions for a batch of samples, row `b` belonging to `batch[b]`.
    /// Implementations must produce, for each sample, exactly the bits
    /// a single-sample evaluation would.
    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<Vec<f64>>>;

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let s = Sample { x: x.to_vec(), y: Vec::new() };
        Ok(self.predict_batch(std::slice::from_ref(&s))?.remove(0))
    }
}

fn check_dataset<M: Network + ?Sized>(m: &M, ds: &LabeledDataset) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.d() != m.input_dim() {
        return Err(Error::shape("dataset input", m.input_dim(), ds.d()));
    }
    if ds.out_dim() != m.output_dim() {
        return Err(Error::shape("dataset targets", m.output_dim(), ds.out_dim()));
    }
    Ok(())
}

/// Mean per-sample loss, accumulated in sample order.
pub fn empirical_loss<M: Network + ?Sized>(m: &M, ds: &LabeledDataset, kind: LossKind) -> Result<f64> {
    check_dataset(m, ds)?;
    let mut total = 0.0;
    for chunk in ds.samples().chunks(EVAL_CHUNK) {
        let preds = m.predict_batch(chunk)?;
        for (s, p) in chunk.iter().zip(&preds) {
            total += kind.value(&s.y, p);
        }
    }
    Ok(total / ds.len() as f64)
}

/// Mean loss over a batch (no target-shape validation beyond the loss).
pub fn batch_loss<M: Network + ?Sized>(m: &M, batch: &[Sample], kind: LossKind) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let preds = m.predict_batch(batch)?;
    let total: f64 = batch.iter().zip(&preds).map(|(s, p)| kind.value(&s.y, p)).sum();
    Ok(total / batch.len() as f64)
}

/// Fraction of misclassified samples.
pub fn classification_error<M: Network + ?Sized>(m: &M, ds: &LabeledDataset) -> Result<f64> {
    check_dataset(m, ds)?;
    let mut wrong = 0usize;
    for chunk in ds.samples().chunks(EVAL_CHUNK) {
        let preds = m.predict_batch(chunk)?;
        wrong += chunk.iter().zip(&preds).filter(|(s, p)| is_misclassified(&s.y, p)).count();
    }
    Ok(wrong as f64 / ds.len() as f64)
}

/// Loss and error in a single pass.
pub fn evaluate<M: Network + ?Sized>(m: &M, ds: &LabeledDataset, kind: LossKind) -> Result<Metrics> {
    check_dataset(m, ds)?;
    let mut total = 0.0;
    let mut wrong = 0usize;
    for chunk in ds.samples().chunks(EVAL_CHUNK) {
        let preds = m.predict_batch(chunk)?;
        for (s, p) in chunk.iter().zip(&preds) {
            total += kind.value(&s.y, p);
            if is_misclassified(&s.y, p) {
                wrong += 1;
            }
        }
    }
    let n = ds.len() as f64;
    Ok(Metrics { loss: total / n, error: wrong as f64 / n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub loss: f64,
    pub error: f64,
}
