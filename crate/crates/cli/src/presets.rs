//! Checked-in experiment configs.

use crate::config::ExperimentConfig;
use crate::error::CliError;

const PRESETS: &[(&str, &str)] = &[
  ("e_non", include_str!("../presets/e_non.toml")),
  ("e_kkk19", include_str!("../presets/e_kkk19.toml")),
  ("e_feller", include_str!("../presets/e_feller.toml")),
  ("e_singular", include_str!("../presets/e_singular.toml")),
  ("rcm_vsrw", include_str!("../presets/rcm_vsrw.toml")),
  ("geom_stable_hunt", include_str!("../presets/geom_stable_hunt.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
  PRESETS.iter().map(|(n, _)| *n)
}

/// Source text of a preset, comments included.
pub fn source(name: &str) -> Result<&'static str, CliError> {
  PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).ok_or_else(|| CliError::UnknownPreset(name.to_string()))
}

pub fn preset(name: &str) -> Result<ExperimentConfig, CliError> {
  ExperimentConfig::parse(source(name)?)
}
