//! Dispersion of states in tensor squares of quantum group representations.

pub mod cartan;
pub mod classical;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod minimize;
pub mod dispersion;
pub mod repn;
pub mod rmatrix;

pub use error::{Error, Result};
