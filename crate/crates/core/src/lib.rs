//! Dimension theory of diagonal self-affine measures.

pub mod cli;
pub mod dims;
pub mod disintegration;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod ifs;
pub mod measure;
pub mod rng;
pub mod scalar;
pub mod separation;

pub use error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;
