//! Meyer's construction: the suppressed-jump process `X^(rho)` with jumps
//! longer than `rho` reattached at Poisson times.

use rand::Rng;

use crate::error::{Error, Result};
use crate::num::dist;
use crate::parallel::par_map;
use crate::rng::{path_rng, PathRng};

use super::levy::PowerLevy;
use super::stepper::Stepper;
use super::variates::poisson;
use super::{check_grid, PathRecord, ProcessSpec, StepRule};

/// `X^(rho)`, the reattachment intensity and the big-jump law.
#[derive(Debug, Clone, PartialEq)]
pub struct MeyerSplit {
  pub rho: f64,
  /// The base with jumps longer than `rho` removed.
  pub small: ProcessSpec,
  /// `lambda_rho = J(x, B(x, rho)^c)`, constant for Lévy bases.
  pub intensity: f64,
  jumps: Option<PowerLevy>,
}

impl MeyerSplit {
  /// Displacement of one reattached jump (`nu` restricted to `|z| > rho`,
  /// normalized).
  pub fn sample_large_jump<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
    match &self.jumps {
      Some(j) => j.sample_jump(self.rho, f64::INFINITY, rng, out),
      None => out.iter_mut().for_each(|o| *o = 0.0),
    }
  }
}

/// Splits a Lévy base with a power-law density at `rho`; `rho = inf` returns
/// the base itself with zero intensity.
pub fn meyer_split(base: &ProcessSpec, rho: f64) -> Result<MeyerSplit> {
  if !(rho > 0.0) {
    return Err(Error::OutOfRange { what: "rho", value: rho, lo: 0.0, hi: f64::INFINITY });
  }
  base.validate()?;
  let jumps = match base.triplet()? {
    Some(t) => t.jumps,
    None => None,
  };
  let Some(jumps) = jumps else {
    return Err(Error::Unsupported("Meyer's construction needs a Lévy base with a power-law density".into()));
  };
  if rho == f64::INFINITY {
    return Ok(MeyerSplit { rho, small: base.clone(), intensity: 0.0, jumps: None });
  }
  Ok(MeyerSplit {
    rho,
    small: ProcessSpec::SuppressedMeyer { base: Box::new(base.clone()), rho, step: StepRule::default() },
    intensity: jumps.tail(rho),
    jumps: Some(jumps),
  })
}

/// A Meyer path with its reattachment record.
#[derive(Debug, Clone, PartialEq)]
pub struct MeyerPath {
  pub path: PathRecord,
  /// `(time, |jump|)` of every reattached jump.
  pub reattached: Vec<(f64, f64)>,
  /// With a reference radius `r`: times of reattached jumps shorter than
  /// `r/4` (first class) and of the rest (second class).
  pub reference_radius: Option<f64>,
  pub first_class: Vec<f64>,
  pub second_class: Vec<f64>,
}

fn meyer_path(
  split: &MeyerSplit,
  stepper: &Stepper,
  x: &[f64],
  grid: &[f64],
  reference_radius: Option<f64>,
  rng: &mut PathRng,
) -> Result<MeyerPath> {
  let d = x.len();
  let mut rec = PathRecord::new(x.to_vec());
  let mut reattached = Vec::new();
  let mut y = x.to_vec();
  let mut jump = vec![0.0; d];
  let mut t = 0.0;
  for &tk in grid {
    let dt = tk - t;
    stepper.advance(&mut y, dt, rng)?;
    let n = poisson(split.intensity * dt, rng);
    let mut times: Vec<f64> = (0..n).map(|_| t + dt * rng.random::<f64>()).collect();
    times.sort_by(f64::total_cmp);
    for s in times {
      split.sample_large_jump(rng, &mut jump);
      for (a, b) in y.iter_mut().zip(&jump) {
        *a += b;
      }
      reattached.push((s, crate::num::norm(&jump)));
    }
    rec.push(tk, y.clone(), dist(&y, x).ln());
    t = tk;
  }
  let (mut first_class, mut second_class) = (Vec::new(), Vec::new());
  if let Some(r) = reference_radius {
    for &(s, size) in &reattached {
      if size < r / 4.0 {
        first_class.push(s);
      } else {
        second_class.push(s);
      }
    }
  }
  Ok(MeyerPath { path: rec, reattached, reference_radius, first_class, second_class })
}

/// One Meyer path (stream 0 of `seed`).
pub fn sample_meyer_path(
  base: &ProcessSpec,
  rho: f64,
  x: &[f64],
  grid: &[f64],
  seed: u64,
  step: &StepRule,
  reference_radius: Option<f64>,
) -> Result<MeyerPath> {
  Ok(sample_meyer_paths(base, rho, x, grid, 1, seed, step, reference_radius, 1)?.remove(0))
}

/// `n` Meyer paths; path `i` uses stream `i` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn sample_meyer_paths(
  base: &ProcessSpec,
  rho: f64,
  x: &[f64],
  grid: &[f64],
  n: usize,
  seed: u64,
  step: &StepRule,
  reference_radius: Option<f64>,
  workers: usize,
) -> Result<Vec<MeyerPath>> {
  check_grid(grid)?;
  let mut split = meyer_split(base, rho)?;
  if let ProcessSpec::SuppressedMeyer { step: s, .. } = &mut split.small {
    *s = step.clone();
  }
  let stepper = Stepper::new(&split.small)?;
  par_map(n, workers, |i| meyer_path(&split, &stepper, x, grid, reference_radius, &mut path_rng(seed, i as u64)))
    .into_iter()
    .collect()
}
