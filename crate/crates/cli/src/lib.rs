//! Command-line orchestration: configuration, experiment runs, artifacts and reports.

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod thresholds;

pub use cli::{main_with, Cli};
pub use config::{resolve, Experiment, ExperimentConfig, Plan};
pub use error::{CliError, CliResult};
