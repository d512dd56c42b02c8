//! Chung-type ratio statistics along geometric time grids, windowed minima
//! and cross-path aggregation.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_document, Provenance};
use crate::parallel::par_map;
use crate::rng::path_rng;
use crate::samplers::{PathRecord, ProcessSpec, Stepper};
use crate::scale::ScaleFunction;
use crate::stats::{median, quantile_lower};

/// Largest admissible time at zero: `e^{-e}`.
pub fn zero_cutoff() -> f64 {
  (-E).exp()
}

/// Smallest admissible time at infinity: `e^e`.
pub fn infinity_cutoff() -> f64 {
  E.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
  AtZero,
  AtInfinity,
}

impl Direction {
  pub fn default_ratio(self) -> f64 {
    match self {
      Direction::AtZero => 0.8,
      Direction::AtInfinity => 1.25,
    }
  }
}

/// Geometric grid ordered toward the limit point: from `min(hi, e^{-e})`
/// down to `lo` at zero, from `max(lo, e^e)` up to `hi` at infinity.
pub fn ratio_grid(direction: Direction, lo: f64, hi: f64, q: f64) -> Result<Vec<f64>> {
  if !(lo > 0.0 && lo < hi) {
    return Err(Error::InvalidArgument(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
  }
  let mut out = Vec::new();
  match direction {
    Direction::AtZero => {
      if !(q > 0.0 && q < 1.0) {
        return Err(Error::OutOfRange { what: "grid ratio", value: q, lo: 0.0, hi: 1.0 });
      }
      let mut t = hi.min(zero_cutoff());
      while t >= lo * (1.0 - 1e-12) {
        out.push(t);
        t *= q;
      }
    }
    Direction::AtInfinity => {
      if !(q > 1.0) {
        return Err(Error::OutOfRange { what: "grid ratio", value: q, lo: 1.0, hi: f64::INFINITY });
      }
      let mut t = lo.max(infinity_cutoff());
      while t <= hi * (1.0 + 1e-12) {
        out.push(t);
        t *= q;
      }
    }
  }
  if out.is_empty() {
    return Err(Error::InvalidArgument("empty ratio grid".into()));
  }
  Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeMin {
  /// `floor(log10 t)`.
  pub decade: i32,
  pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurve {
  pub direction: Direction,
  /// Ordered toward the limit point.
  pub t_grid: Vec<f64>,
  pub ratios: Vec<f64>,
  /// Minimum of the ratios from the start of the grid through each point.
  pub window_min: Vec<f64>,
  /// Minima over each decade alone, ordered toward the limit point.
  pub decade_minima: Vec<DecadeMin>,
  /// Minima over all grid points from the start through the end of each
  /// decade: nonincreasing toward the limit point.
  pub windowed_minima: Vec<DecadeMin>,
  pub path_id: usize,
}

impl RatioCurve {
  fn new(direction: Direction, t_grid: Vec<f64>, ratios: Vec<f64>, path_id: usize) -> Self {
    let mut window_min = Vec::with_capacity(ratios.len());
    let mut m = f64::INFINITY;
    for &r in &ratios {
      m = m.min(r);
      window_min.push(m);
    }
    let mut decade_minima: Vec<DecadeMin> = Vec::new();
    for (&t, &r) in t_grid.iter().zip(&ratios) {
      let decade = t.log10().floor() as i32;
      match decade_minima.last_mut() {
        Some(last) if last.decade == decade => last.min = last.min.min(r),
        _ => decade_minima.push(DecadeMin { decade, min: r }),
      }
    }
    let mut m = f64::INFINITY;
    let windowed_minima = decade_minima
      .iter()
      .map(|w| {
        m = m.min(w.min);
        DecadeMin { decade: w.decade, min: m }
      })
      .collect();
    Self { direction, t_grid, ratios, window_min, decade_minima, windowed_minima, path_id }
  }

  /// Min over the last `k` decade windows before the limit point.
  pub fn liminf_proxy(&self, k: usize) -> f64 {
    let n = self.decade_minima.len();
    self.decade_minima[n.saturating_sub(k)..].iter().map(|w| w.min).fold(f64::INFINITY, f64::min)
  }

  /// `t,ratio,window_min`.
  pub fn to_csv(&self, prov: Option<&Provenance>) -> String {
    let rows: Vec<Vec<f64>> =
      (0..self.t_grid.len()).map(|i| vec![self.t_grid[i], self.ratios[i], self.window_min[i]]).collect();
    csv_document(prov, "t,ratio,window_min", &rows)
  }
}

/// `ln M_t` at the last observation not after `t`.
fn ln_sup_at(path: &PathRecord, t: f64) -> Result<f64> {
  let k = path.times.partition_point(|&s| s <= t * (1.0 + 1e-12));
  if k == 0 {
    return Err(Error::InvalidArgument(format!("time {t} precedes the first observation {:?}", path.times.first())));
  }
  Ok(path.ln_running_sup[k - 1])
}

/// `phi(M_t) log|log t| / t`; `M_t = 0` gives 0.
pub fn ratio_at_zero<S: ScaleFunction + ?Sized>(
  path: &PathRecord,
  phi: &S,
  t_grid: &[f64],
  path_id: usize,
) -> Result<RatioCurve> {
  let cut = zero_cutoff() * (1.0 + 1e-12);
  let mut ratios = Vec::with_capacity(t_grid.len());
  for &t in t_grid {
    if !(t > 0.0 && t <= cut) {
      return Err(Error::OutOfRange { what: "time at zero", value: t, lo: 0.0, hi: zero_cutoff() });
    }
    let ln_m = ln_sup_at(path, t)?;
    if ln_m == f64::NEG_INFINITY {
      ratios.push(0.0);
      continue;
    }
    let ln_phi = phi.ln_eval(ln_m)?;
    ratios.push((ln_phi + t.ln().abs().ln().ln() - t.ln()).exp());
  }
  Ok(RatioCurve::new(Direction::AtZero, t_grid.to_vec(), ratios, path_id))
}

/// `M_t / phi^{-1}(t / log log t)`.
pub fn ratio_at_infinity<S: ScaleFunction + ?Sized>(
  path: &PathRecord,
  phi: &S,
  t_grid: &[f64],
  path_id: usize,
) -> Result<RatioCurve> {
  let cut = infinity_cutoff() * (1.0 - 1e-12);
  let mut ratios = Vec::with_capacity(t_grid.len());
  for &t in t_grid {
    if !(t >= cut && t.is_finite()) {
      return Err(Error::OutOfRange { what: "time at infinity", value: t, lo: infinity_cutoff(), hi: f64::INFINITY });
    }
    let ln_m = ln_sup_at(path, t)?;
    if ln_m == f64::NEG_INFINITY {
      ratios.push(0.0);
      continue;
    }
    let ln_norm = phi.ln_inverse(t.ln() - t.ln().ln().ln())?;
    ratios.push((ln_m - ln_norm).exp());
  }
  Ok(RatioCurve::new(Direction::AtInfinity, t_grid.to_vec(), ratios, path_id))
}

/// `t^{1/alpha} |log t|^{gamma/alpha} (log|log t|)^{-1/alpha}`.
pub fn feller_normalization(alpha: f64, gamma: f64, t: f64) -> Result<f64> {
  if !(t > 0.0 && t < zero_cutoff() * (1.0 + 1e-12)) {
    return Err(Error::OutOfRange { what: "time at zero", value: t, lo: 0.0, hi: zero_cutoff() });
  }
  let l = t.ln().abs();
  Ok((t.ln() / alpha + gamma / alpha * l.ln() - l.ln().ln() / alpha).exp())
}

/// How paths are observed for ratio curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Monitor {
  /// Longest substep used for the running supremum.
  pub max_dt: Option<f64>,
  /// Substeps per grid interval at least.
  pub min_substeps: usize,
}

impl Default for Monitor {
  fn default() -> Self {
    Self { max_dt: None, min_substeps: 8 }
  }
}

/// Ratio curves of `n` paths from `x`; path `i` uses stream `i` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_curves<S: ScaleFunction + ?Sized>(
  spec: &ProcessSpec,
  x: &[f64],
  phi: &S,
  direction: Direction,
  ratio_grid: &[f64],
  n: usize,
  seed: u64,
  monitor: &Monitor,
  workers: usize,
) -> Result<Vec<RatioCurve>> {
  let stepper = Stepper::new(spec)?;
  let mut sim_grid = ratio_grid.to_vec();
  sim_grid.sort_by(f64::total_cmp);
  sim_grid.dedup();
  par_map(n, workers, |i| {
    let path = stepper.monitored_path(
      x,
      &sim_grid,
      monitor.max_dt.unwrap_or(f64::INFINITY),
      monitor.min_substeps,
      &mut path_rng(seed, i as u64),
    )?;
    match direction {
      Direction::AtZero => ratio_at_zero(&path, phi, ratio_grid, i),
      Direction::AtInfinity => ratio_at_infinity(&path, phi, ratio_grid, i),
    }
  })
  .into_iter()
  .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilEstimate {
  pub direction: Direction,
  pub last_decades: usize,
  pub per_path: Vec<f64>,
  pub q10: f64,
  pub q50: f64,
  pub q90: f64,
  pub group_medians: Vec<f64>,
  /// `max / min` of the group medians; 1 with a single group.
  pub stability_ratio: f64,
  /// Paths whose proxy is 0, non-finite, or off the median by a factor 10.
  pub outliers: usize,
}

/// Default number of decades in the liminf proxy.
pub const LAST_DECADES: usize = 3;

/// Aggregates curves sharing a grid; `groups` partitions curve indices into
/// seed groups (empty: one group).
pub fn aggregate(curves: &[RatioCurve], groups: &[Vec<usize>], last_decades: usize) -> Result<LilEstimate> {
  let first = curves.first().ok_or(Error::TooFewSamples { needed: 1, got: 0 })?;
  if curves.iter().any(|c| c.direction != first.direction || c.t_grid != first.t_grid) {
    return Err(Error::MixedGrids);
  }
  let per_path: Vec<f64> = curves.iter().map(|c| c.liminf_proxy(last_decades)).collect();
  let mut sorted = per_path.clone();
  sorted.sort_by(f64::total_cmp);
  let q50 = median(&per_path);
  let all: Vec<usize> = (0..curves.len()).collect();
  let groups: Vec<&[usize]> =
    if groups.is_empty() { vec![&all] } else { groups.iter().map(|g| g.as_slice()).collect() };
  let mut group_medians = Vec::new();
  for g in groups {
    if g.iter().any(|&i| i >= curves.len()) || g.is_empty() {
      return Err(Error::InvalidArgument("seed group refers to a missing curve".into()));
    }
    group_medians.push(median(&g.iter().map(|&i| per_path[i]).collect::<Vec<_>>()));
  }
  let hi = group_medians.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
  let lo = group_medians.iter().cloned().fold(f64::INFINITY, f64::min);
  let stability_ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
  let outliers = per_path.iter().filter(|&&v| !(v > 0.0 && v.is_finite()) || v < q50 / 10.0 || v > q50 * 10.0).count();
  Ok(LilEstimate {
    direction: first.direction,
    last_decades,
    q10: quantile_lower(&sorted, 0.1),
    q50,
    q90: quantile_lower(&sorted, 0.9),
    per_path,
    group_medians,
    stability_ratio,
    outliers,
  })
}

/// Medians across curves of the windowed per-decade minima, ordered toward
/// the limit point.
pub fn decade_medians(curves: &[RatioCurve]) -> Vec<DecadeMin> {
  let Some(first) = curves.first() else {
    return vec![];
  };
  first
    .windowed_minima
    .iter()
    .enumerate()
    .map(|(k, w)| DecadeMin {
      decade: w.decade,
      min: median(&curves.iter().filter_map(|c| c.windowed_minima.get(k).map(|m| m.min)).collect::<Vec<_>>()),
    })
    .collect()
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::scale::PowerScale;

  #[test]
  fn grids_respect_cutoffs() {
    let z = ratio_grid(Direction::AtZero, 1e-8, 1.0, 0.8).unwrap();
    assert_eq!(z[0], zero_cutoff());
    assert!(z.windows(2).all(|w| w[1] < w[0]) && *z.last().unwrap() >= 1e-8);
    let i = ratio_grid(Direction::AtInfinity, 1.0, 1e4, 1.25).unwrap();
    assert_eq!(i[0], infinity_cutoff());
  }

  #[test]
  fn frozen_path_has_zero_ratio() {
    let mut p = PathRecord::new(vec![0.0]);
    p.push(1e-9, vec![0.0], f64::NEG_INFINITY);
    let c = ratio_at_zero(&p, &PowerScale { c: 1.0, beta: 1.5 }, &[1e-3, 1e-5], 0).unwrap();
    assert_eq!(c.ratios, vec![0.0, 0.0]);
  }

  #[test]
  fn feller_normalization_reduces_for_gamma_zero() {
    let t: f64 = 1e-6;
    let v = feller_normalization(1.5, 0.0, t).unwrap();
    let l = t.ln().abs().ln();
    assert!((v / (t / l).powf(1.0 / 1.5) - 1.0).abs() < 1e-12);
  }
}
