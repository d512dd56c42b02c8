//! Experiment files.

use std::path::PathBuf;

use lil_lab::exitlab::{ExitOptions, Region};
use lil_lab::lattice::{WalkKind, WeightLaw};
use lil_lab::lil::Monitor;
use lil_lab::samplers::ProcessSpec;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

pub const TASKS: &[&str] = &[
  "exit_stats",
  "check_A",
  "check_B",
  "check_EP",
  "check_pruitt",
  "check_O",
  "check_NDL",
  "lil_zero",
  "lil_infinity",
  "meyer_equiv",
  "scale_table",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
  #[serde(rename = "exit_stats")]
  ExitStats,
  #[serde(rename = "check_A")]
  CheckA,
  #[serde(rename = "check_B")]
  CheckB,
  #[serde(rename = "check_EP")]
  CheckEp,
  #[serde(rename = "check_pruitt")]
  CheckPruitt,
  #[serde(rename = "check_O")]
  CheckO,
  #[serde(rename = "check_NDL")]
  CheckNdl,
  #[serde(rename = "lil_zero")]
  LilZero,
  #[serde(rename = "lil_infinity")]
  LilInfinity,
  #[serde(rename = "meyer_equiv")]
  MeyerEquiv,
  #[serde(rename = "scale_table")]
  ScaleTable,
}

/// Random conductance model on `[-L, L]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
  /// Always `"lattice"`.
  pub kind: String,
  pub d: usize,
  pub alpha: f64,
  pub half_width: i64,
  /// Jump range `R_J`; defaults to `L / 4`.
  #[serde(default)]
  pub range: Option<f64>,
  pub law: WeightLaw,
  #[serde(default = "vsrw")]
  pub walk: WalkKind,
  /// Seed of the bond weights; defaults to the master seed.
  #[serde(default)]
  pub field_seed: Option<u64>,
}

fn vsrw() -> WalkKind {
  WalkKind::Vsrw
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProcessConfig {
  Lattice(LatticeConfig),
  Spec(ProcessSpec),
}

impl<'de> Deserialize<'de> for ProcessConfig {
  fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
    use serde::de::Error;
    let v = toml::Value::deserialize(de)?;
    let kind = v.get("kind").and_then(|k| k.as_str()).ok_or_else(|| D::Error::custom("process: missing `kind`"))?;
    if kind == "lattice" {
      LatticeConfig::deserialize(v).map(ProcessConfig::Lattice).map_err(|e| D::Error::custom(format!("process: {e}")))
    } else {
      ProcessSpec::deserialize(v).map(ProcessConfig::Spec).map_err(|e| D::Error::custom(format!("process: {e}")))
    }
  }
}

impl ProcessConfig {
  pub fn dim(&self) -> usize {
    match self {
      ProcessConfig::Lattice(l) => l.d,
      ProcessConfig::Spec(s) => s.dim(),
    }
  }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
  /// Centers; defaults to the origin.
  pub x: Vec<Vec<f64>>,
  /// Radii; defaults to `[1]`.
  pub r: Vec<f64>,
  /// Explicit time grid (survival tables, EP).
  pub t: Option<Vec<f64>>,
}

/// Scale function of the LIL ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleConfig {
  /// `Phi(x, .)` of the process, tabulated per center.
  Process {
    #[serde(default = "table_r_min")]
    r_min: f64,
    #[serde(default = "table_r_max")]
    r_max: f64,
    #[serde(default = "per_decade")]
    per_decade: usize,
  },
  Power {
    c: f64,
    beta: f64,
  },
  GeometricStable {
    beta: f64,
  },
  LogCorrectedPower {
    alpha: f64,
    gamma: f64,
  },
}

fn table_r_min() -> f64 {
  1e-12
}
fn table_r_max() -> f64 {
  1e6
}
fn per_decade() -> usize {
  16
}

impl Default for ScaleConfig {
  fn default() -> Self {
    ScaleConfig::Process { r_min: table_r_min(), r_max: table_r_max(), per_decade: per_decade() }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LilConfig {
  pub t_min: f64,
  pub t_max: f64,
  /// Grid ratio; 0.8 at zero, 1.25 at infinity.
  pub q: Option<f64>,
  pub scale: ScaleConfig,
  /// Number of contiguous seed groups for the stability ratio.
  pub groups: usize,
  pub last_decades: usize,
  pub monitor: Monitor,
  /// Also write one CSV per path.
  pub write_curves: bool,
}

impl Default for LilConfig {
  fn default() -> Self {
    Self {
      t_min: 1e-8,
      t_max: 1e-3,
      q: None,
      scale: ScaleConfig::default(),
      groups: 2,
      last_decades: 3,
      monitor: Monitor::default(),
      write_curves: false,
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpConfig {
  /// Time window as fractions of `Phi(x, r)`.
  pub window: (f64, f64),
  pub per_decade: usize,
}

impl Default for EpConfig {
  fn default() -> Self {
    Self { window: (0.01, 0.1), per_decade: 8 }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NdlConfig {
  pub eta: f64,
}

impl Default for NdlConfig {
  fn default() -> Self {
    Self { eta: 0.5 }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OConfig {
  pub lo: Vec<f64>,
  pub hi: Vec<f64>,
  pub centers_per_axis: usize,
  pub radii: Vec<f64>,
  pub ball_points: usize,
  pub o4_paths: usize,
  pub o4_time_fraction: f64,
  pub o4_max_half_width: f64,
  /// Upper end of the `2 h Phi` bracket.
  pub sandwich_c_max: f64,
}

impl Default for OConfig {
  fn default() -> Self {
    Self {
      lo: vec![-1.0],
      hi: vec![1.0],
      centers_per_axis: 5,
      radii: vec![1e-3, 1e-2, 0.03, 0.1, 0.3],
      ball_points: 16,
      o4_paths: 2000,
      o4_time_fraction: 0.1,
      o4_max_half_width: 0.05,
      sandwich_c_max: 100.0,
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeyerConfig {
  pub rho: f64,
  pub time: f64,
}

impl Default for MeyerConfig {
  fn default() -> Self {
    Self { rho: 1.0, time: 1.0 }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleTableConfig {
  pub r_min: f64,
  pub r_max: f64,
  pub per_decade: usize,
  /// Window for the scaling-index fit; defaults to the table range.
  pub window: Option<(f64, f64)>,
}

impl Default for ScaleTableConfig {
  fn default() -> Self {
    Self { r_min: 1e-4, r_max: 1e4, per_decade: 16, window: None }
  }
}

/// Pass criteria; every criterion is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Checks {
  /// Exit-scaling slope expected at each center.
  pub slope_targets: Option<Vec<f64>>,
  pub slope_tol: Option<f64>,
  /// Require the tail fit on `n <= 6` to pass at every ball.
  pub tail_fit: bool,
  /// `linear` or `no_power_law`.
  pub ep_expect: Option<String>,
  pub ep_c_max: Option<f64>,
  /// Median over paths of the last windowed minimum.
  pub median_bracket: Option<(f64, f64)>,
  /// Every windowed per-decade minimum lies in `(lo, hi]`.
  pub minima_bracket: Option<(f64, f64)>,
  /// Max/min of the per-decade medians.
  pub decade_spread_max: Option<f64>,
  pub stability_max: Option<f64>,
  pub ks_p_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
  pub name: String,
  pub task: Task,
  pub process: ProcessConfig,
  pub seed: u64,
  /// Monte Carlo paths per estimate.
  #[serde(default = "paths")]
  pub paths: usize,
  /// Worker threads; `LIL_LAB_THREADS` overrides.
  #[serde(default)]
  pub workers: Option<usize>,
  /// Output directory; defaults to `out/<name>`.
  #[serde(default)]
  pub output: Option<PathBuf>,
  #[serde(default)]
  pub grids: Grids,
  #[serde(default)]
  pub exit: ExitOptions,
  #[serde(default)]
  pub region: Option<Region>,
  #[serde(default)]
  pub lil: LilConfig,
  #[serde(default)]
  pub ep: EpConfig,
  #[serde(default)]
  pub ndl: NdlConfig,
  #[serde(default)]
  pub o: OConfig,
  #[serde(default)]
  pub meyer: MeyerConfig,
  #[serde(default)]
  pub scale: ScaleTableConfig,
  #[serde(default)]
  pub checks: Checks,
}

fn paths() -> usize {
  1000
}

fn line_of(text: &str, key: &str) -> Option<usize> {
  text
    .lines()
    .position(|l| l.trim_start().strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('=')))
    .map(|i| i + 1)
}

impl ExperimentConfig {
  pub fn parse(text: &str) -> Result<Self, CliError> {
    let raw: toml::Table =
      toml::from_str(text).map_err(|e| CliError::Config { field: None, line: None, msg: e.to_string() })?;
    match raw.get("task") {
      None => {
        return Err(CliError::Config { field: Some("task".into()), line: None, msg: "missing field `task`".into() });
      }
      Some(toml::Value::String(t)) if TASKS.contains(&t.as_str()) => {}
      Some(other) => {
        return Err(CliError::Config {
          field: Some("task".into()),
          line: line_of(text, "task"),
          msg: format!("unknown task {other}; expected one of {}", TASKS.join(", ")),
        });
      }
    }
    let mut cfg: Self = toml::from_str(text).map_err(|e| CliError::Config {
      field: None,
      line: e.span().map(|s| text[..s.start].lines().count().max(1)),
      msg: e.message().to_string(),
    })?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
  }

  fn fill_defaults(&mut self) {
    if self.grids.x.is_empty() {
      self.grids.x = vec![vec![0.0; self.process.dim()]];
    }
    if self.grids.r.is_empty() {
      self.grids.r = vec![1.0];
    }
  }

  fn validate(&self) -> Result<(), CliError> {
    let bad = |field: &str, msg: String| Err(CliError::Config { field: Some(field.into()), line: None, msg });
    let d = self.process.dim();
    if let Some(x) = self.grids.x.iter().find(|x| x.len() != d) {
      return bad("grids.x", format!("center {x:?} is not {d}-dimensional"));
    }
    if self.grids.r.iter().any(|&r| r.is_nan() || r <= 0.0) {
      return bad("grids.r", "radii must be positive".into());
    }
    if self.paths == 0 {
      return bad("paths", "need at least one path".into());
    }
    if matches!(self.task, Task::CheckA) && self.region.is_none() {
      return bad("region", "check_A needs a region".into());
    }
    if let ProcessConfig::Lattice(l) = &self.process {
      if l.kind != "lattice" {
        return bad("process.kind", format!("unexpected kind {}", l.kind));
      }
      if !matches!(self.task, Task::ExitStats | Task::LilInfinity) {
        return bad("task", "lattice processes support exit_stats and lil_infinity".into());
      }
    }
    Ok(())
  }

  /// Canonical TOML rendering.
  pub fn to_toml(&self) -> String {
    toml::to_string(self).expect("config serializes")
  }
}
