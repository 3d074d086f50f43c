//! File formats, run configuration, benchmarks and reports for `scnet-core`,
//! and the command implementations behind the `scnet` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use commands::Predictor;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
