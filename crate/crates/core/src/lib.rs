//! Mean-field two-layer and multilayer networks trained by SGD, their
//! dropout sub-networks, explicit low-loss paths between trained
//! solutions, and the ideal-particle limit dynamics.

pub mod data;
pub mod error;
pub mod harness;
pub mod loss;
pub mod meanfield;
pub mod math;
pub mod model;
pub mod multilayer;
pub mod path;
pub mod sgd;
pub mod two_layer;

pub use error::{Error, Result};
pub use loss::LossKind;
pub use math::{Activation, DenseMatrix, RngStream};
pub use model::{classification_error, empirical_loss, evaluate, Metrics, Network};
