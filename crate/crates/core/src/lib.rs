//! Frequency Principle laboratory: small dense networks, spectral diagnostics,
//! Poisson solvers, gradient-flow theory checks and dataset loaders.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod data;
pub mod error;
pub mod linalg;
pub mod nn;
pub mod pde;
pub mod scalar;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::Matrix<f64>;
pub type Network = nn::Network<f64>;
pub type Gradient = nn::Gradient<f64>;
pub type Optimizer = nn::Optimizer<f64>;
pub type LabeledDataset = data::LabeledDataset<f64>;
pub type IdealModel = theory::IdealModel<f64>;
