//! Exact state-vector simulation of windowed quantum phase estimation and
//! iterative projective ground-state preparation.

pub mod circuit;
pub mod error;
pub mod experiment;
pub mod optimize;
pub mod qpe;
pub mod statevector;
pub mod stateprep;
pub mod thirring;
pub mod windows;

pub use error::{Error, Result};
