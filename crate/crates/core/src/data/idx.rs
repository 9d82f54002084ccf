//! IDX (MNIST-style) files: big-endian `u32` magic, big-endian `u32`
//! dimension sizes, then raw unsigned bytes.

use std::path::Path;

use super::{LabeledDataset, Sample};
use crate::error::IdxError;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
const CLASSES: usize = 10;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    file: &'static str,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32, IdxError> {
        let raw = self.take(4)?;
        Ok(u32::from_be_bytes([raw[0], raw[1], raw[2], raw[3]]))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IdxError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(IdxError::Truncated {
                file: self.file,
                needed: self.pos.saturating_add(n),
                have: self.bytes.len(),
            }),
        }
    }

    fn magic(&mut self, expected: u32) -> Result<(), IdxError> {
        let found = self.u32()?;
        if found != expected {
            return Err(IdxError::BadMagic {
                file: self.file,
                expected,
                found,
            });
        }
        Ok(())
    }
}

/// Decode an image/label pair already held in memory. Pixels become floats
/// in `[0, 255]`; labels become one-hot vectors over 10 classes.
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<LabeledDataset, IdxError> {
    let mut img = Reader { bytes: images, pos: 0, file: "images" };
    img.magic(IDX_IMAGES_MAGIC)?;
    let n_images = img.u32()? as usize;
    let rows = img.u32()? as usize;
    let cols = img.u32()? as usize;

    let mut lab = Reader { bytes: labels, pos: 0, file: "labels" };
    lab.magic(IDX_LABELS_MAGIC)?;
    let n_labels = lab.u32()? as usize;

    if n_images != n_labels {
        return Err(IdxError::CountMismatch { images: n_images, labels: n_labels });
    }
    let d = rows * cols;
    let pixels = img.take(n_images * d)?;
    let label_bytes = lab.take(n_labels)?;

    let mut samples = Vec::with_capacity(n_images);
    for (index, (chunk, &label)) in pixels.chunks_exact(d.max(1)).zip(label_bytes).enumerate() {
        if label as usize >= CLASSES {
            return Err(IdxError::BadLabel { index, label, classes: CLASSES });
        }
        let mut y = vec![0.0; CLASSES];
        y[label as usize] = 1.0;
        let x = if d == 0 { Vec::new() } else { chunk.iter().map(|&p| p as f64).collect() };
        samples.push(Sample { x, y });
    }
    Ok(LabeledDataset { samples, d, classes: CLASSES })
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset, IdxError> {
    let read = |p: &Path| {
        std::fs::read(p).map_err(|source| IdxError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let images = read(images_path)?;
    let labels = read(labels_path)?;
    parse_idx(&images, &labels)
}

/// Encode `rows × cols` images (pixel values must be integers in 0..=255).
pub fn encode_idx_images(ds: &LabeledDataset, rows: usize, cols: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + ds.len() * rows * cols);
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(ds.len() as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    for s in ds.samples() {
        out.extend(s.x.iter().map(|&v| v as u8));
    }
    out
}

/// Encode the argmax of each one-hot target.
pub fn encode_idx_labels(ds: &LabeledDataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + ds.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(ds.len() as u32).to_be_bytes());
    for s in ds.samples() {
        let label = s
            .y
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > s.y[best] { i } else { best });
        out.push(label as u8);
    }
    out
}
