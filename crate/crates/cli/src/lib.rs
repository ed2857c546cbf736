//! Batch front-end: model files, run configuration, command execution and reports.

pub mod config;
pub mod parse;
pub mod report;
pub mod run;

pub use config::{Cli, RunConfig};
pub use run::{run, RunError};
