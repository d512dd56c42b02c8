//! Ball exit times: Monte Carlo estimates and the exit-time conditions.
//!
//! Exits are detected on grid crossings and reported at the right endpoint of
//! the crossing step. Lattice walks exit at exact jump times.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_document, Provenance};
use crate::lattice::{walk_exit, ConductanceField, WalkKind};
use crate::num::{dist, gamma, sphere_area};
use crate::parallel::par_map;
use crate::rng::{derive_seed, path_rng, PathRng};
use crate::samplers::ProcessSpec;
use crate::samplers::Stepper;
use crate::scale::log_grid;
use crate::stats::{wilson, Estimate, LinearFit, Z95};

/// Maximal admissible fraction of censored paths.
pub const MAX_CENSORING: f64 = 0.01;
/// Minimal number of paths still alive at `n E tau` for a tail row.
pub const MIN_SURVIVORS: usize = 50;
/// Minimal number of survivors in the ball for the NDL histogram.
pub const NDL_MIN_SURVIVORS: usize = 200;

/// What is being exited.
#[derive(Debug, Clone, Copy)]
pub enum ExitTarget<'a> {
  Process(&'a ProcessSpec),
  Lattice { field: &'a ConductanceField, kind: WalkKind },
}

impl ExitTarget<'_> {
  fn dim(&self) -> usize {
    match self {
      ExitTarget::Process(s) => s.dim(),
      ExitTarget::Lattice { field, .. } => field.d,
    }
  }

  /// Natural time scale at radius `r`: `Phi(x, r)`, or `r^alpha` on lattices.
  fn time_scale(&self, x: &[f64], r: f64) -> Result<f64> {
    match self {
      ExitTarget::Process(s) => s.phi(x, r),
      ExitTarget::Lattice { field, .. } => Ok(r.powf(field.alpha)),
    }
  }

  fn hash(&self) -> String {
    match self {
      ExitTarget::Process(s) => s.hash(),
      ExitTarget::Lattice { field, .. } => {
        crate::rng::json_hash(&(field.d, field.alpha, field.half_width, field.range, field.law, field.seed))
      }
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitSample {
  pub r: f64,
  pub x: Vec<f64>,
  pub tau: f64,
  pub exit_point: Vec<f64>,
  /// Horizon reached or box left before the ball was; `tau` is a lower bound.
  pub censored: bool,
}

/// Numerical knobs of exit sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExitOptions {
  /// Time step as a fraction of the time scale at `r`.
  pub step_fraction: f64,
  /// Explicit time step; overrides `step_fraction`.
  pub dt: Option<f64>,
  /// Explicit horizon; otherwise `horizon_factor` times a pilot mean.
  pub horizon: Option<f64>,
  pub horizon_factor: f64,
  pub pilot_paths: usize,
  /// Survival grid; defaults to 8 points per decade over `[1e-3, 10] E tau`.
  pub t_grid: Option<Vec<f64>>,
  pub workers: usize,
}

impl Default for ExitOptions {
  fn default() -> Self {
    Self {
      step_fraction: 1e-3,
      dt: None,
      horizon: None,
      horizon_factor: 50.0,
      pilot_paths: 256,
      t_grid: None,
      workers: 1,
    }
  }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
  /// `n` for tail rows, `t` for survival rows.
  pub at: f64,
  pub p: f64,
  pub lo: f64,
  pub hi: f64,
  pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitStats {
  pub x: Vec<f64>,
  pub r: f64,
  pub mean_tau: Estimate,
  /// `P(tau >= n E tau)`, `n = 1..n_max`.
  pub tail: Vec<TableRow>,
  /// `P(tau <= t)`.
  pub survival: Vec<TableRow>,
  pub n_samples: usize,
  pub n_censored: usize,
  pub censoring_rate: f64,
  pub dt: Option<f64>,
  pub horizon: f64,
  pub seed: u64,
  pub spec_hash: String,
}

fn exit_one(
  target: &ExitTarget,
  stepper: Option<&Stepper>,
  x: &[f64],
  r: f64,
  dt: f64,
  horizon: f64,
  rng: &mut PathRng,
) -> Result<ExitSample> {
  match target {
    ExitTarget::Process(_) => {
      let stepper = stepper.expect("process targets carry a stepper");
      let mut y = x.to_vec();
      let mut k: u64 = 0;
      loop {
        k += 1;
        let t = k as f64 * dt;
        stepper.advance(&mut y, dt, rng)?;
        if dist(&y, x) >= r {
          return Ok(ExitSample { r, x: x.to_vec(), tau: t, exit_point: y, censored: false });
        }
        if t >= horizon {
          return Ok(ExitSample { r, x: x.to_vec(), tau: t, exit_point: y, censored: true });
        }
      }
    }
    ExitTarget::Lattice { field, kind } => {
      let site: Vec<i64> = x.iter().map(|c| c.round() as i64).collect();
      let (tau, exit_point, censored) = walk_exit(field, *kind, &site, r, horizon, rng);
      Ok(ExitSample { r, x: x.to_vec(), tau, exit_point, censored })
    }
  }
}

/// `n` exit samples with a fixed step and horizon; path `i` uses stream `i`.
#[allow(clippy::too_many_arguments)]
pub fn sample_exits(
  target: &ExitTarget,
  x: &[f64],
  r: f64,
  n: usize,
  dt: f64,
  horizon: f64,
  seed: u64,
  workers: usize,
) -> Result<Vec<ExitSample>> {
  if x.len() != target.dim() {
    return Err(Error::InvalidArgument(format!("center must have dimension {}", target.dim())));
  }
  if !(r > 0.0) || !(horizon > 0.0) {
    return Err(Error::InvalidArgument("radius and horizon must be positive".into()));
  }
  let stepper = match target {
    ExitTarget::Process(s) => {
      if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be positive and finite, got {dt}")));
      }
      Some(Stepper::new(s)?)
    }
    ExitTarget::Lattice { .. } => None,
  };
  par_map(n, workers, |i| exit_one(target, stepper.as_ref(), x, r, dt, horizon, &mut path_rng(seed, i as u64)))
    .into_iter()
    .collect()
}

fn resolve_dt(target: &ExitTarget, x: &[f64], r: f64, opts: &ExitOptions) -> Result<f64> {
  match (target, opts.dt) {
    (ExitTarget::Lattice { .. }, _) => Ok(0.0),
    (_, Some(dt)) => Ok(dt),
    _ => Ok(opts.step_fraction * target.time_scale(x, r)?),
  }
}

/// Horizon used by [`estimate_exit`]: explicit, or `horizon_factor` times the
/// mean of a pilot run.
pub fn resolve_horizon(target: &ExitTarget, x: &[f64], r: f64, seed: u64, opts: &ExitOptions) -> Result<f64> {
  if let Some(h) = opts.horizon {
    return Ok(h);
  }
  let scale = target.time_scale(x, r)?;
  if !scale.is_finite() {
    return Err(Error::InvalidArgument("no natural time scale; set an explicit horizon".into()));
  }
  let dt = resolve_dt(target, x, r, opts)?;
  let pilot = sample_exits(target, x, r, opts.pilot_paths, dt, 1e3 * scale, derive_seed(seed, "pilot"), opts.workers)?;
  let taus: Vec<f64> = pilot.iter().map(|s| s.tau).collect();
  Ok(opts.horizon_factor * Estimate::from_samples(&taus).value)
}

/// Exit statistics at `(x, r)` from `n` paths.
pub fn estimate_exit(
  target: &ExitTarget,
  x: &[f64],
  r: f64,
  n: usize,
  seed: u64,
  opts: &ExitOptions,
) -> Result<ExitStats> {
  let horizon = resolve_horizon(target, x, r, seed, opts)?;
  let dt = resolve_dt(target, x, r, opts)?;
  let samples = sample_exits(target, x, r, n, dt, horizon, seed, opts.workers)?;
  let mut stats = ExitStats::from_samples(&samples, opts.t_grid.as_deref())?;
  stats.dt = matches!(target, ExitTarget::Process(_)).then_some(dt);
  stats.horizon = horizon;
  stats.seed = seed;
  stats.spec_hash = target.hash();
  if stats.censoring_rate > MAX_CENSORING {
    return Err(Error::ExcessCensoring { rate: stats.censoring_rate, limit: MAX_CENSORING });
  }
  Ok(stats)
}

/// Running bounds that make `p`, `lo`, `hi` monotone in the row order.
fn enforce_monotone(rows: &mut [TableRow], nonincreasing: bool) {
  for i in 1..rows.len() {
    let prev = rows[i - 1];
    let cur = &mut rows[i];
    if nonincreasing {
      cur.p = cur.p.min(prev.p);
      cur.lo = cur.lo.min(prev.lo);
      cur.hi = cur.hi.min(prev.hi);
    } else {
      cur.p = cur.p.max(prev.p);
      cur.lo = cur.lo.max(prev.lo);
      cur.hi = cur.hi.max(prev.hi);
    }
  }
}

impl ExitStats {
  /// Reduces samples; censored samples are counted and excluded.
  pub fn from_samples(samples: &[ExitSample], t_grid: Option<&[f64]>) -> Result<Self> {
    let first = samples.first().ok_or(Error::TooFewSamples { needed: 1, got: 0 })?;
    let mut taus: Vec<f64> = samples.iter().filter(|s| !s.censored).map(|s| s.tau).collect();
    let n_censored = samples.len() - taus.len();
    if taus.is_empty() {
      return Err(Error::ExcessCensoring { rate: 1.0, limit: MAX_CENSORING });
    }
    let mean_tau = Estimate::from_samples(&taus);
    taus.sort_by(f64::total_cmp);
    let m = taus.len();
    let at_least = |v: f64| m - taus.partition_point(|&t| t < v);
    let at_most = |v: f64| taus.partition_point(|&t| t <= v);

    let mut tail = Vec::new();
    for n in 1..=1000usize {
      let k = at_least(n as f64 * mean_tau.value);
      if k < MIN_SURVIVORS {
        break;
      }
      let (p, lo, hi) = wilson(k, m, Z95);
      tail.push(TableRow { at: n as f64, p, lo, hi, count: k });
    }
    enforce_monotone(&mut tail, true);

    let grid = match t_grid {
      Some(g) => g.to_vec(),
      None => log_grid(1e-3 * mean_tau.value, 10.0 * mean_tau.value, 8),
    };
    let mut survival: Vec<TableRow> = grid
      .iter()
      .map(|&t| {
        let k = at_most(t);
        let (p, lo, hi) = wilson(k, m, Z95);
        TableRow { at: t, p, lo, hi, count: k }
      })
      .collect();
    enforce_monotone(&mut survival, false);

    Ok(Self {
      x: first.x.clone(),
      r: first.r,
      mean_tau,
      tail,
      survival,
      n_samples: samples.len(),
      n_censored,
      censoring_rate: n_censored as f64 / samples.len() as f64,
      dt: None,
      horizon: samples.iter().map(|s| s.tau).fold(0.0, f64::max),
      seed: 0,
      spec_hash: String::new(),
    })
  }

  /// Largest `n` in the tail table.
  pub fn n_max(&self) -> usize {
    self.tail.len()
  }

  /// `n,p,lo,hi`.
  pub fn tail_csv(&self, prov: Option<&Provenance>) -> String {
    let rows: Vec<Vec<f64>> = self.tail.iter().map(|r| vec![r.at, r.p, r.lo, r.hi]).collect();
    csv_document(prov, "n,p,lo,hi", &rows)
  }

  /// `t,p,lo,hi`.
  pub fn survival_csv(&self, prov: Option<&Provenance>) -> String {
    let rows: Vec<Vec<f64>> = self.survival.iter().map(|r| vec![r.at, r.p, r.lo, r.hi]).collect();
    csv_document(prov, "t,p,lo,hi", &rows)
  }
}

/// `E^x tau_{B(x, r)}` of the symmetric 1d `alpha`-stable process with symbol
/// `|xi|^alpha` started at distance `y` from the center.
pub fn stable_exit_mean_1d(alpha: f64, r: f64, y: f64) -> f64 {
  (r * r - y * y).powf(alpha / 2.0) / gamma(1.0 + alpha)
}

/// Log-linear fit of a tail table: `ln p = a - c5 n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
  pub slope: f64,
  pub slope_ci: (f64, f64),
  pub r2: f64,
  /// `C_4 e^{-C_5 n} <= p <= C_6 e^{-C_7 n}` with `C_5 = C_7 = -slope`.
  pub c4: f64,
  pub c5: f64,
  pub c6: f64,
  pub c7: f64,
  pub n_used: usize,
  pub passed: bool,
}

/// Fits `n in [1, n_hi]` of the tail table; passes with `R^2 >= 0.98` and a
/// slope interval below 0.
pub fn fit_tail(stats: &ExitStats, n_hi: usize) -> Result<TailFit> {
  let rows: Vec<&TableRow> = stats.tail.iter().filter(|r| r.at <= n_hi as f64).collect();
  let x: Vec<f64> = rows.iter().map(|r| r.at).collect();
  let y: Vec<f64> = rows.iter().map(|r| r.p.ln()).collect();
  let fit = LinearFit::fit(&x, &y)
    .filter(|_| rows.len() >= 3)
    .ok_or_else(|| Error::InsufficientEvents(format!("{} tail rows", rows.len())))?;
  let c = -fit.slope;
  let resid: Vec<f64> = rows.iter().map(|r| r.p.ln() + c * r.at).collect();
  let ci = fit.slope_ci();
  Ok(TailFit {
    slope: fit.slope,
    slope_ci: ci,
    r2: fit.r2,
    c4: resid.iter().cloned().fold(f64::INFINITY, f64::min).exp(),
    c5: c,
    c6: resid.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp(),
    c7: c,
    n_used: rows.len(),
    passed: fit.r2 >= 0.98 && ci.1 < 0.0,
  })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
  pub name: String,
  pub passed: bool,
  pub constants: BTreeMap<String, f64>,
  pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
  pub verdicts: Vec<ConditionVerdict>,
  pub r_grid: Vec<f64>,
  pub x_grid: Vec<Vec<f64>>,
  /// `(x index, r, E tau)` for every estimated ball.
  pub means: Vec<(usize, f64, f64)>,
  pub seed: u64,
  pub spec_hash: String,
  pub passed: bool,
}

/// Box `U = [lo, hi]` with the `r < R_0 ∧ C_0 delta_U(x)` geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
  pub lo: Vec<f64>,
  pub hi: Vec<f64>,
  /// Defaults to 1/2.
  pub c0: Option<f64>,
  /// Defaults to a quarter of the shortest side.
  pub r0: Option<f64>,
}

impl Region {
  pub fn admits(&self, x: &[f64], r: f64) -> bool {
    let delta =
      x.iter().zip(self.lo.iter().zip(&self.hi)).map(|(c, (a, b))| (c - a).min(b - c)).fold(f64::INFINITY, f64::min);
    let side = self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    r < self.r0.unwrap_or(side / 4.0).min(self.c0.unwrap_or(0.5) * delta)
  }
}

fn verdict(name: &str, passed: bool, constants: &[(&str, f64)], note: impl Into<String>) -> ConditionVerdict {
  ConditionVerdict {
    name: name.into(),
    passed,
    constants: constants.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    note: note.into(),
  }
}

/// Exit-time conditions (A1)–(A4) on `U`, or their at-infinity versions
/// (B1)–(B4) when `region` is `None`.
#[allow(clippy::too_many_arguments)]
pub fn check_exit_conditions(
  spec: &ProcessSpec,
  region: Option<&Region>,
  r_grid: &[f64],
  x_grid: &[Vec<f64>],
  n: usize,
  seed: u64,
  opts: &ExitOptions,
) -> Result<ConditionReport> {
  let label = if region.is_some() { "A" } else { "B" };
  if let Some(u) = region {
    for x in x_grid {
      for &r in r_grid {
        if !u.admits(x, r) {
          return Err(Error::InvalidArgument(format!("ball ({x:?}, {r}) violates the region geometry")));
        }
      }
    }
  }
  let target = ExitTarget::Process(spec);
  let mut counter = 0u64;
  let mut run = |x: &[f64], r: f64| -> Result<ExitStats> {
    counter += 1;
    estimate_exit(&target, x, r, n, derive_seed(seed, &format!("ball{counter}")), opts)
  };
  let mut means = Vec::new();
  let (mut c1, mut c2, mut c3_hi, mut c3_lo) = (1.0f64, 0.0f64, 0.0f64, f64::INFINITY);
  let mut a2_monotone = true;
  let mut a4_ok = true;
  let (mut c4, mut c5, mut c6, mut c7) = (f64::INFINITY, f64::INFINITY, 0.0f64, f64::INFINITY);
  let mut min_r2 = f64::INFINITY;
  for (ix, x) in x_grid.iter().enumerate() {
    for &r in r_grid {
      let here = run(x, r)?;
      let half = run(x, r / 2.0)?;
      means.push((ix, r, here.mean_tau.value));
      // (1): neighbours at distance r/2 along the first axis.
      for sign in [-1.0, 1.0] {
        let mut y = x.clone();
        y[0] += sign * r / 2.0;
        let other = run(&y, r)?;
        let q = here.mean_tau.value / other.mean_tau.value;
        c1 = c1.max(q).max(1.0 / q);
      }
      // (2)
      let q = here.mean_tau.value / half.mean_tau.value;
      c2 = c2.max(q);
      a2_monotone &= half.mean_tau.value < here.mean_tau.value;
      // (3)
      let prod = spec.jump_tail(x, r)? * here.mean_tau.value;
      c3_hi = c3_hi.max(prod);
      c3_lo = c3_lo.min(prod);
      // (4)
      match fit_tail(&here, 6) {
        Ok(f) => {
          a4_ok &= f.passed;
          c4 = c4.min(f.c4);
          c5 = c5.min(f.c5);
          c6 = c6.max(f.c6);
          c7 = c7.min(f.c7);
          min_r2 = min_r2.min(f.r2);
        }
        Err(_) => a4_ok = false,
      }
    }
  }
  let verdicts = vec![
    verdict(&format!("{label}1"), c1.is_finite(), &[("C1", c1)], "max pairwise E tau ratio at distance r/2"),
    verdict(
      &format!("{label}2"),
      c2.is_finite() && a2_monotone,
      &[("C2", c2)],
      "max E tau(r) / E tau(r/2); E tau decreases as r shrinks",
    ),
    verdict(
      &format!("{label}3"),
      c3_hi.is_finite(),
      &[("C3", c3_hi), ("C3_lower", c3_lo)],
      "J(x, B(x,r)^c) E tau over the grid",
    ),
    verdict(
      &format!("{label}4"),
      a4_ok,
      &[("C4", c4), ("C5", c5), ("C6", c6), ("C7", c7), ("min_r2", min_r2)],
      "log-linear tail fits on n in [1, 6]",
    ),
  ];
  let passed = verdicts.iter().all(|v| v.passed);
  Ok(ConditionReport {
    verdicts,
    r_grid: r_grid.to_vec(),
    x_grid: x_grid.to_vec(),
    means,
    seed,
    spec_hash: spec.hash(),
    passed,
  })
}

/// Steps per smallest grid time in [`check_ep`].
pub const EP_STEPS_PER_T0: f64 = 100.0;

/// Power-law envelope `P(tau <= t) <= c (t / phi)^theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpReport {
  pub phi: f64,
  pub theta: f64,
  pub c: f64,
  pub r2: f64,
  pub rows: Vec<TableRow>,
  /// The data are not a power law (super-polynomially small early exits);
  /// only the `theta = 1` upper envelope `c` is meaningful.
  pub no_power_law: bool,
  pub linear: bool,
}

/// Early-exit power law over `t_grid`, which must lie in `(0, 0.2 phi(x, r))`.
#[allow(clippy::too_many_arguments)]
pub fn check_ep(
  spec: &ProcessSpec,
  x: &[f64],
  r: f64,
  t_grid: &[f64],
  n: usize,
  seed: u64,
  workers: usize,
) -> Result<EpReport> {
  let phi = spec.phi(x, r)?;
  let mut grid = t_grid.to_vec();
  grid.sort_by(f64::total_cmp);
  let (Some(&t0), Some(&t1)) = (grid.first(), grid.last()) else {
    return Err(Error::InvalidArgument("empty time grid".into()));
  };
  if !(t0 > 0.0) || t1 >= 0.2 * phi {
    return Err(Error::InvalidArgument(format!("time grid must lie in (0, {})", 0.2 * phi)));
  }
  let dt = t0 / EP_STEPS_PER_T0;
  let samples = sample_exits(&ExitTarget::Process(spec), x, r, n, dt, t1, seed, workers)?;
  let mut taus: Vec<f64> = samples.iter().filter(|s| !s.censored).map(|s| s.tau).collect();
  taus.sort_by(f64::total_cmp);
  let mut rows: Vec<TableRow> = grid
    .iter()
    .map(|&t| {
      let k = taus.partition_point(|&s| s <= t * (1.0 + 1e-12));
      let (p, lo, hi) = wilson(k, n, Z95);
      TableRow { at: t, p, lo, hi, count: k }
    })
    .collect();
  enforce_monotone(&mut rows, false);
  let pts: Vec<&TableRow> = rows.iter().filter(|r| r.count > 0).collect();
  if pts.is_empty() {
    return Err(Error::InsufficientEvents("no exits before the last grid time".into()));
  }
  let envelope = |theta: f64| pts.iter().map(|r| r.p / (r.at / phi).powf(theta)).fold(0.0, f64::max);
  let fit = LinearFit::fit(
    &pts.iter().map(|r| (r.at / phi).ln()).collect::<Vec<_>>(),
    &pts.iter().map(|r| r.p.ln()).collect::<Vec<_>>(),
  );
  let (theta, r2, no_power_law) = match fit {
    Some(f) if pts.len() >= 3 && pts.len() == rows.len() => (f.slope, f.r2, f.slope > 2.5 || f.r2 < 0.9),
    Some(f) => (f.slope, f.r2, true),
    None => (f64::NAN, f64::NAN, true),
  };
  let c = if no_power_law { envelope(1.0) } else { envelope(theta) };
  Ok(EpReport { phi, theta, c, r2, rows, no_power_law, linear: !no_power_law && (0.85..=1.15).contains(&theta) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruittRow {
  pub r: f64,
  pub phi: f64,
  pub mean_tau: f64,
  /// `E tau / Phi`.
  pub c16: f64,
  /// `sup_{t <= Phi} P(tau <= t) Phi / t`.
  pub c14: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruittReport {
  pub rows: Vec<PruittRow>,
  pub c16_min: f64,
  pub c16_max: f64,
  pub c14_max: f64,
  pub passed: bool,
}

/// Maximal spread `max C16 / min C16` accepted as stable across radii.
pub const PRUITT_SPREAD: f64 = 2.0;

/// Empirical Pruitt constants over `r_grid`.
pub fn check_pruitt(
  spec: &ProcessSpec,
  x: &[f64],
  r_grid: &[f64],
  n: usize,
  seed: u64,
  opts: &ExitOptions,
) -> Result<PruittReport> {
  let target = ExitTarget::Process(spec);
  let mut rows = Vec::new();
  for (i, &r) in r_grid.iter().enumerate() {
    let phi = spec.phi(x, r)?;
    let mut o = opts.clone();
    o.t_grid = Some(log_grid(1e-3 * phi, phi, 8));
    let s = estimate_exit(&target, x, r, n, derive_seed(seed, &format!("pruitt{i}")), &o)?;
    let c14 = s.survival.iter().map(|row| row.p * phi / row.at).fold(0.0, f64::max);
    rows.push(PruittRow { r, phi, mean_tau: s.mean_tau.value, c16: s.mean_tau.value / phi, c14 });
  }
  let c16_min = rows.iter().map(|r| r.c16).fold(f64::INFINITY, f64::min);
  let c16_max = rows.iter().map(|r| r.c16).fold(0.0, f64::max);
  let c14_max = rows.iter().map(|r| r.c14).fold(0.0, f64::max);
  Ok(PruittReport {
    passed: c14_max.is_finite() && c16_min > 0.0 && c16_max / c16_min <= PRUITT_SPREAD,
    rows,
    c16_min,
    c16_max,
    c14_max,
  })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdlReport {
  /// `phi(eta r)`.
  pub time: f64,
  pub starts: Vec<Vec<f64>>,
  pub survivors: usize,
  /// `(bin center, density, lo, hi)` for each start and bin.
  pub bins: Vec<(Vec<f64>, f64, f64, f64)>,
  pub min_density: f64,
  pub min_density_lo: f64,
  /// `min density * V(x, r)`.
  pub c_l: f64,
  pub passed: bool,
}

/// Histogram estimate of the killed density at time `phi(eta r)` over
/// `B(x, eta^2 r)`, started from the center and from `x ± eta^2 r / 2` along
/// the first axis.
pub fn check_ndl(
  spec: &ProcessSpec,
  x: &[f64],
  r: f64,
  eta: f64,
  n: usize,
  seed: u64,
  workers: usize,
) -> Result<NdlReport> {
  let d = spec.dim();
  if d > 2 {
    return Err(Error::Unsupported("the NDL histogram is built in d <= 2".into()));
  }
  if !(eta > 0.0 && eta < 1.0) {
    return Err(Error::OutOfRange { what: "eta", value: eta, lo: 0.0, hi: 1.0 });
  }
  let time = spec.phi(x, eta * r)?;
  let inner = eta * eta * r;
  let dt = time / 500.0;
  let stepper = Stepper::new(spec)?;
  let mut starts = vec![x.to_vec()];
  for sign in [-1.0, 1.0] {
    let mut y = x.to_vec();
    y[0] += sign * inner / 2.0;
    starts.push(y);
  }
  const PER_AXIS: usize = 8;
  let side = 2.0 * inner / PER_AXIS as f64;
  let cells: Vec<Vec<f64>> = if d == 1 {
    (0..PER_AXIS).map(|i| vec![x[0] - inner + (i as f64 + 0.5) * side]).collect()
  } else {
    let mut v = Vec::new();
    for i in 0..PER_AXIS {
      for j in 0..PER_AXIS {
        let c = vec![x[0] - inner + (i as f64 + 0.5) * side, x[1] - inner + (j as f64 + 0.5) * side];
        if dist(&c, x) + side / std::f64::consts::SQRT_2 <= inner {
          v.push(c);
        }
      }
    }
    v
  };
  let cell_volume = side.powi(d as i32);
  let steps = (time / dt).round() as u64;
  let mut bins = Vec::new();
  let mut survivors = 0;
  for (si, y0) in starts.iter().enumerate() {
    let stream = derive_seed(seed, &format!("ndl{si}"));
    let ends: Vec<Option<Vec<f64>>> = par_map(n, workers, |i| {
      let mut rng = path_rng(stream, i as u64);
      let mut y = y0.clone();
      for _ in 0..steps {
        stepper.advance(&mut y, dt, &mut rng)?;
        if dist(&y, x) >= r {
          return Ok(None);
        }
      }
      Ok(Some(y))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let alive: Vec<Vec<f64>> = ends.into_iter().flatten().filter(|z| dist(z, x) < inner).collect();
    survivors += alive.len();
    for c in &cells {
      let k = alive.iter().filter(|z| z.iter().zip(c).all(|(a, b)| (a - b).abs() < side / 2.0)).count();
      let (p, lo, hi) = wilson(k, n, Z95);
      bins.push((c.clone(), p / cell_volume, lo / cell_volume, hi / cell_volume));
    }
  }
  if survivors < NDL_MIN_SURVIVORS {
    return Err(Error::InsufficientSurvivors(format!("{survivors} paths alive in B(x, eta^2 r) at time {time}")));
  }
  let min_density = bins.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
  let min_density_lo = bins.iter().map(|b| b.2).fold(f64::INFINITY, f64::min);
  let volume = sphere_area(d) * r.powi(d as i32) / d as f64;
  Ok(NdlReport {
    time,
    starts,
    survivors,
    bins,
    min_density,
    min_density_lo,
    c_l: min_density * volume,
    passed: min_density_lo > 0.0,
  })
}

/// Least-squares slope of `ln E tau` against `ln r`.
pub fn exit_scaling_slope(stats: &[ExitStats]) -> Option<LinearFit> {
  let x: Vec<f64> = stats.iter().map(|s| s.r.ln()).collect();
  let y: Vec<f64> = stats.iter().map(|s| s.mean_tau.value.ln()).collect();
  LinearFit::fit(&x, &y)
}
