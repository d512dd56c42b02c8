//! Experiment runner for `lil-lab`: TOML configs, presets, task execution
//! and artifacts.

pub mod config;
pub mod error;
pub mod presets;
pub mod run;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use run::{run_config, Outcome};

use std::path::Path;

/// Reads and runs a config file.
pub fn run_file(path: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
  let text = std::fs::read_to_string(path)?;
  let cfg = ExperimentConfig::parse(&text)?;
  run_config(&cfg, out)
}
