//! Noisy Turing machine codes, a staged pseudo-UTM, exact propagation of
//! code uncertainty and the local geometry of the resulting potential.

pub mod dgm;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod linalg;
pub mod machine;
pub mod newton;
pub mod noisy;
pub mod oracle;
pub mod poly;
pub mod propagate;
pub mod sampler;
pub mod utm;

pub use error::{Error, Result};
