//! Unified transform method for mKdV on the quarter plane.

pub mod cli;
pub mod contour;
pub mod core;
pub mod error;
pub mod rhsolver;
pub mod spectral;
pub mod tscatter;
pub mod xscatter;

pub use error::{Error, Result};
