//! Dense linear algebra, activations and the seeded random stream shared by
//! every model in the crate.

mod activation;
mod matrix;
mod rng;

pub use activation::Activation;
pub use matrix::{dot, DenseMatrix};
pub use rng::RngStream;
