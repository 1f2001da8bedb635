//! Simulation and analysis of noisy holographic preparation of 2D states on a
//! 1D device: transition maps, locality bookkeeping, noise injection, local
//! expectation values and bath-map contraction.

pub mod error;
pub mod circuits;
pub mod fcs;
pub mod locality;
pub mod mixing;
pub mod stabilizer;
pub mod quantum;

pub use error::{Error, Result};
