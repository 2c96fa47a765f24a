//! Experiment runner for the costep co-simulation kernel.

pub mod builtins;
pub mod commands;
pub mod config;
pub mod error;

pub use error::{CliError, CliResult};
