//! Deep mean-field network
//! `ŷ = (1/N) W_{L+1} σ_L(… (1/N) W₂ σ₁(W₁ x) …)`.

mod dropout;
mod params;
mod path;
mod train;

pub use dropout::{dropout_gap_ml, dropout_ml, nested_gap_ml, nested_half_patterns, DropoutPatternMl};
pub use params::{MultilayerArch, MultilayerParams};
pub use path::build_path_ml;
pub use train::{batch_gradient_ml, sgd_step_ml, train_ml, train_ml_observed, LayerScale, LayerTrainMask, MaskMode};
