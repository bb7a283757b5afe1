//! Batch front end for the credal toolkit: `uq`, `ood`, `calibrate` and
//! `synth` subcommands.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
//! failure, 4 I/O failure.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{Measure, RunConfig, Uncertainty};
pub use error::{CliError, CliResult};
