//! Sparse linear regression across signal-to-noise regimes.
//!
//! The crate covers the Gaussian random-design model `y = X beta + sigma z`,
//! ridge, lasso, elastic-net and best subset estimators with their
//! SNR-aware tunings, closed-form minimax risk approximations, numerical checks
//! of the single-spike lower-bound construction and a deterministic Monte Carlo
//! harness for MSE-versus-SNR sweeps.

pub mod bayes;
pub mod error;
pub mod harness;
pub mod estimators;
pub mod model;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
