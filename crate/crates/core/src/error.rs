use std::path::PathBuf;

use thiserror::Error;

/// Failures while decoding IDX image/label files.
#[derive(Debug, Error)]
pub enum IdxError {
    #[error("bad magic number in {file}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        file: &'static str,
        expected: u32,
        found: u32,
    },
    #[error("truncated {file} file: needed {needed} bytes, have {have}")]
    Truncated {
        file: &'static str,
        needed: usize,
        have: usize,
    },
    #[error("count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("label {label} at index {index} is outside 0..{classes}")]
    BadLabel {
        index: usize,
        label: u8,
        classes: usize,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible shapes in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: String,
        got: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite {what} at step {step}")]
    NonFinite { what: &'static str, step: usize },
    #[error("sample stream exhausted after {got} samples ({needed} needed)")]
    StreamExhausted { needed: usize, got: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error(transparent)]
    Idx(#[from] IdxError),
    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),
    #[error("inconsistent checkpoint shapes: {0}")]
    CheckpointShape(String),
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: impl ToString,
        got: impl ToString,
    ) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NonFinite { .. } => "non_finite",
            Error::StreamExhausted { .. } => "stream_exhausted",
            Error::EmptyDataset => "empty_dataset",
            Error::Idx(IdxError::BadMagic { .. }) => "idx_bad_magic",
            Error::Idx(IdxError::Truncated { .. }) => "idx_truncated",
            Error::Idx(IdxError::CountMismatch { .. }) => "idx_count_mismatch",
            Error::Idx(IdxError::BadLabel { .. }) => "idx_bad_label",
            Error::Idx(IdxError::Io { .. }) => "idx_io",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::MalformedCheckpoint(_) => "malformed_checkpoint",
            Error::CheckpointShape(_) => "checkpoint_shape",
            Error::Config { .. } => "config",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
