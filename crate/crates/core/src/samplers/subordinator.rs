//! Subordinators: Laplace exponents and exact increments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Integrator;
use crate::rng::path_rng;
use crate::scale::TabulatedScale;

use super::variates::{ln_gamma_variate, ln_positive_stable, poisson};
use super::PathRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubordinatorSpec {
  /// `phi1(lambda) = lambda^alpha`, `alpha` in `(0, 1)`.
  Stable { alpha: f64 },
  /// `phi1(lambda) = log(1 + lambda^alpha)`, `alpha` in `(0, 1]`.
  GeometricStable { alpha: f64 },
  /// `phi1(lambda) = b lambda + int (1 - e^{-lambda u}) nu(du)` with `nu`
  /// given by its tail `(u, nu((u, inf)))`; log-log interpolated, power-law
  /// extrapolated past the last point.
  DriftPlusCompound {
    drift: f64,
    #[serde(default)]
    tail: Vec<(f64, f64)>,
  },
}

impl SubordinatorSpec {
  pub fn validate(&self) -> Result<()> {
    match self {
      SubordinatorSpec::Stable { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => {
        Err(Error::OutOfRange { what: "subordinator alpha", value: *alpha, lo: 0.0, hi: 1.0 })
      }
      SubordinatorSpec::GeometricStable { alpha } if !(*alpha > 0.0 && *alpha <= 1.0) => {
        Err(Error::OutOfRange { what: "subordinator alpha", value: *alpha, lo: 0.0, hi: 1.0 })
      }
      SubordinatorSpec::DriftPlusCompound { drift, tail } => {
        if !(*drift >= 0.0 && drift.is_finite()) {
          return Err(Error::OutOfRange { what: "drift", value: *drift, lo: 0.0, hi: f64::INFINITY });
        }
        // A tabulated tail has finite total mass.
        if *drift == 0.0 {
          return Err(Error::InvalidArgument(
            "a compound subordinator needs a positive drift (either b != 0 or nu has infinite mass)".into(),
          ));
        }
        for (i, w) in tail.windows(2).enumerate() {
          if !(w[1].0 > w[0].0) || !(w[1].1 < w[0].1) {
            return Err(Error::NonMonotone { index: i + 1 });
          }
        }
        if tail.iter().any(|&(u, t)| !(u > 0.0 && t > 0.0)) {
          return Err(Error::InvalidArgument("tail points must be positive".into()));
        }
        Ok(())
      }
      _ => Ok(()),
    }
  }

  /// Jump tail `nu((u, inf))` of the compound part.
  fn compound_tail(tail: &[(f64, f64)], u: f64) -> f64 {
    let Some(&(u0, t0)) = tail.first() else {
      return 0.0;
    };
    if u < u0 {
      return t0;
    }
    if tail.len() == 1 {
      return 0.0;
    }
    let k = tail.partition_point(|&(v, _)| v <= u).clamp(1, tail.len() - 1);
    let (a, b) = (tail[k - 1], tail[k]);
    let slope = (b.1.ln() - a.1.ln()) / (b.0.ln() - a.0.ln());
    (a.1.ln() + slope * (u.ln() - a.0.ln())).exp()
  }

  fn compound_jump<R: Rng + ?Sized>(tail: &[(f64, f64)], rng: &mut R) -> f64 {
    let (u0, t0) = tail[0];
    if tail.len() == 1 {
      return u0;
    }
    let target = (t0 * (1.0 - rng.random::<f64>())).ln();
    let k = tail.partition_point(|&(_, t)| t.ln() > target).clamp(1, tail.len() - 1);
    let (a, b) = (tail[k - 1], tail[k]);
    let w = (target - a.1.ln()) / (b.1.ln() - a.1.ln());
    (a.0.ln() + w * (b.0.ln() - a.0.ln())).exp()
  }

  /// `phi1(lambda)`.
  pub fn laplace_exponent(&self, lambda: f64) -> Result<f64> {
    Ok(match self {
      SubordinatorSpec::Stable { alpha } => lambda.powf(*alpha),
      SubordinatorSpec::GeometricStable { alpha } => lambda.powf(*alpha).ln_1p(),
      SubordinatorSpec::DriftPlusCompound { drift, tail } => {
        let mut v = drift * lambda;
        if let Some(&(u0, t0)) = tail.first() {
          v += t0 * -(-lambda * u0).exp_m1();
          if tail.len() > 1 {
            let q = Integrator::<f64>::default();
            v += q.integrate_to_infinity(|u| lambda * (-lambda * u).exp() * Self::compound_tail(tail, u), u0)?;
          }
        }
        v
      }
    })
  }

  /// `phi1` tabulated on `[lambda_min, lambda_max]`.
  pub fn phi1_table(&self, lambda_min: f64, lambda_max: f64, per_decade: usize) -> Result<TabulatedScale<f64>> {
    TabulatedScale::try_from_fn(|l| self.laplace_exponent(l), lambda_min, lambda_max, per_decade)
  }

  /// `ln (S_{t+dt} - S_t)`; `-inf` for a zero increment.
  pub fn ln_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
    match self {
      SubordinatorSpec::Stable { alpha } => dt.ln() / alpha + ln_positive_stable(*alpha, rng),
      SubordinatorSpec::GeometricStable { alpha } => {
        ln_gamma_variate(dt, rng) / alpha + ln_positive_stable(*alpha, rng)
      }
      SubordinatorSpec::DriftPlusCompound { .. } => self.increment(dt, rng).ln(),
    }
  }

  /// `S_{t+dt} - S_t`.
  pub fn increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
    match self {
      SubordinatorSpec::DriftPlusCompound { drift, tail } => {
        let mut s = drift * dt;
        if let Some(&(_, t0)) = tail.first() {
          for _ in 0..poisson(t0 * dt, rng) {
            s += Self::compound_jump(tail, rng);
          }
        }
        s
      }
      _ => self.ln_increment(dt, rng).exp(),
    }
  }
}

/// One subordinator path on `grid`, started at zero. Displacements are
/// tracked in the log domain, so `ln_running_sup` stays exact where `S_t`
/// underflows.
pub fn sample_subordinator_path(sub: &SubordinatorSpec, grid: &[f64], seed: u64) -> Result<PathRecord> {
  sub.validate()?;
  super::check_grid(grid)?;
  let mut rng = path_rng(seed, 0);
  let mut rec = PathRecord::new(vec![0.0]);
  let mut ln_s = f64::NEG_INFINITY;
  let mut t = 0.0;
  for &tk in grid {
    let inc = sub.ln_increment(tk - t, &mut rng);
    ln_s = super::variates::ln_add(ln_s, inc);
    rec.push(tk, vec![ln_s.exp()], ln_s);
    t = tk;
  }
  Ok(rec)
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn compound_tail_interpolates() {
    let tail = vec![(1.0, 4.0), (2.0, 1.0)];
    let t = SubordinatorSpec::compound_tail(&tail, 1.5);
    assert!((t - 4.0 * 1.5f64.powf(-2.0)).abs() < 1e-12);
    assert_eq!(SubordinatorSpec::compound_tail(&tail, 0.5), 4.0);
  }

  #[test]
  fn pure_drift_exponent() {
    let s = SubordinatorSpec::DriftPlusCompound { drift: 1.0, tail: vec![] };
    assert_eq!(s.laplace_exponent(3.0).unwrap(), 3.0);
    assert!(SubordinatorSpec::DriftPlusCompound { drift: 0.0, tail: vec![(1.0, 1.0)] }.validate().is_err());
  }
}
