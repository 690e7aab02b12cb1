//! Instrumented virtual-multiprocessor simulator of 2.5D LU
//! factorization with tournament pivoting.
//!
//! The crate factors real matrices on a simulated px x py x pz
//! processor grid, charges every inter-processor word to a BSP-style
//! communication ledger, and compares the measured critical-path
//! bandwidth of each phase against closed-form cost formulas.
//!
//! Entry points:
//! - [`engine::EngineConfig`] / [`engine::run`] — simulate a factorization
//! - [`model::CostModelParams`] — evaluate the analytical formulas
//! - [`harness::run_sweep`] / [`harness::fit_exponent`] — scaling studies
//!
//! The `examples/` directory holds one runnable program per capability.

pub mod acceptance;
pub mod engine;
pub mod error;
pub mod fabric;
pub mod grid;
pub mod harness;
pub mod matrix;
pub mod model;

pub use error::{Error, Result};
