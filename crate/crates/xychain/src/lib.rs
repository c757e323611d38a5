//! Experiment runner for the disordered XY chain.
//!
//! The numerical work lives in [`xychain_core`]; this crate adds TOML
//! configuration, parallel Monte Carlo drivers, CSV/JSON output and the
//! `xychain` command-line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{AppError, AppResult};
pub use output::{run_and_write, RunOutcome, RunReport};
