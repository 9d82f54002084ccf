//! Mean-field two-layer network `ŷ(x) = (1/N) Σᵢ aᵢ σ(⟨x, wᵢ⟩)`.

mod dropout;
mod params;
mod path;
mod train;

pub use dropout::{dropout2, dropout_gap2, DropoutPattern};
pub use params::{AInit, TwoLayerInit, TwoLayerParams};
pub use path::build_path2;
pub use train::{batch_gradient2, sgd_step2, train2, train2_observed, Gradient2};


