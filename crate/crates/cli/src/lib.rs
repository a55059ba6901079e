//! Experiment runner behind the `correg` binary.
//!
//! Each command maps an [`ExperimentConfig`] to the bytes it writes, so
//! identical configs and seeds give identical files.

pub mod commands;
pub mod config;
pub mod error;

pub use config::ExperimentConfig;
pub use error::CliError;
