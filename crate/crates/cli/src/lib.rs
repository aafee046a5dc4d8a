//! Command-line front end: loads a run configuration, runs solver sweeps,
//! closed-form references and code simulations, and writes CSV tables.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::{CliError, Result};
