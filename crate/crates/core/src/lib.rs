//! B-spline kernels on Lie groups and the equivariant correlation layers
//! built from them.

pub mod error;
pub mod lie_groups;
pub mod splines;
pub mod layers;
pub mod learning;
pub mod verification;
pub mod cli;

pub use error::{Error, Result};
