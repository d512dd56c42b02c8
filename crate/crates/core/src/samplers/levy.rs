//! Lévy triplets with power-law jump densities: exact increments, truncated
//! (suppressed-jump) increments, and the small-jump threshold rule.

use rand::Rng;

use crate::num::{sphere_area, stable_density_constant};
use crate::symbols::PowerDensity;

use super::variates::{normal, poisson, positive_stable, symmetric_stable, unit_vector};

/// Jump measure `nu(dz) = sum_i c_i |z|^{-d-alpha_i} dz`, or the same profile
/// along each coordinate axis when `axis` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLevy {
  pub d: usize,
  pub density: PowerDensity,
  pub axis: bool,
}

/// Unit isotropic stable vector with symbol `|xi|^alpha`.
pub fn isotropic_stable<R: Rng + ?Sized>(alpha: f64, d: usize, rng: &mut R, out: &mut [f64]) {
  if d == 1 {
    out[0] = symmetric_stable(alpha, rng);
    return;
  }
  let scale = if alpha == 2.0 { std::f64::consts::SQRT_2 } else { (2.0 * positive_stable(alpha / 2.0, rng)).sqrt() };
  for o in out.iter_mut() {
    *o = scale * normal(rng);
  }
}

impl PowerLevy {
  fn per_term_mass(&self, alpha: f64, c: f64, a: f64, b: f64) -> f64 {
    let ta = a.powf(-alpha);
    let tb = if b.is_finite() { b.powf(-alpha) } else { 0.0 };
    let half = c * (ta - tb) / alpha;
    if self.axis {
      self.d as f64 * 2.0 * half
    } else {
      sphere_area(self.d) * half
    }
  }

  /// `nu(a < |z| <= b)`; `b` may be infinite.
  pub fn mass_between(&self, a: f64, b: f64) -> f64 {
    self.density.terms.iter().map(|t| self.per_term_mass(t.alpha, t.c, a, b)).sum()
  }

  /// `nu(|z| > s)`.
  pub fn tail(&self, s: f64) -> f64 {
    self.mass_between(s, f64::INFINITY)
  }

  /// Per-coordinate variance of jumps with `|z| <= eps`.
  pub fn small_variance(&self, eps: f64) -> f64 {
    let half: f64 = self.density.terms.iter().map(|t| t.c * eps.powf(2.0 - t.alpha) / (2.0 - t.alpha)).sum();
    if self.axis {
      2.0 * half
    } else {
      sphere_area(self.d) * half / self.d as f64
    }
  }

  /// Pruitt function `int min(|z|^2 / r^2, 1) nu(dz)`.
  pub fn pruitt_h(&self, r: f64) -> f64 {
    self.small_variance(r) * self.d as f64 / (r * r) + self.tail(r)
  }

  /// Radius `l` with `h(l) = 1 / dt`: the displacement scale of one step.
  pub fn step_scale(&self, dt: f64) -> f64 {
    let target = 1.0 / dt;
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..200 {
      let mid = 0.5 * (lo + hi);
      if self.pruitt_h(mid.exp()) > target {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    (0.5 * (lo + hi)).exp()
  }

  /// Jump with `a < |z| <= b`.
  pub fn sample_jump<R: Rng + ?Sized>(&self, a: f64, b: f64, rng: &mut R, out: &mut [f64]) {
    let masses: Vec<f64> = self.density.terms.iter().map(|t| self.per_term_mass(t.alpha, t.c, a, b)).collect();
    let total: f64 = masses.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    let mut k = 0;
    while k + 1 < masses.len() && pick >= masses[k] {
      pick -= masses[k];
      k += 1;
    }
    let alpha = self.density.terms[k].alpha;
    let ta = a.powf(-alpha);
    let tb = if b.is_finite() { b.powf(-alpha) } else { 0.0 };
    let u = rng.random::<f64>();
    let s = (tb + (1.0 - u) * (ta - tb)).powf(-1.0 / alpha);
    out.iter_mut().for_each(|o| *o = 0.0);
    if self.axis {
      let i = rng.random_range(0..self.d);
      out[i] = if rng.random::<bool>() { s } else { -s };
    } else {
      let dir = unit_vector(self.d, rng);
      for (o, v) in out.iter_mut().zip(dir) {
        *o = s * v;
      }
    }
  }

  /// Exact increment over `dt` (sum of independent stable components).
  pub fn exact_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64]) {
    let mut buf = vec![0.0; self.d];
    for t in &self.density.terms {
      if self.axis {
        let k = t.c / stable_density_constant(t.alpha, 1);
        let scale = (k * dt).powf(1.0 / t.alpha);
        for o in out.iter_mut() {
          *o += scale * symmetric_stable(t.alpha, rng);
        }
      } else {
        let k = t.c / stable_density_constant(t.alpha, self.d);
        let scale = (k * dt).powf(1.0 / t.alpha);
        isotropic_stable(t.alpha, self.d, rng, &mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
          *o += scale * b;
        }
      }
    }
  }

  /// Increment over `dt` of the process with jumps above `rho` removed:
  /// Gaussian proxy for `|z| <= eps`, compound Poisson on `(eps, rho]`.
  /// Returns the number of compound-Poisson jumps.
  pub fn truncated_increment<R: Rng + ?Sized>(&self, eps: f64, rho: f64, dt: f64, rng: &mut R, out: &mut [f64]) -> u64 {
    let sd = (self.small_variance(eps) * dt).sqrt();
    for o in out.iter_mut() {
      *o += sd * normal(rng);
    }
    if rho <= eps {
      return 0;
    }
    let n = poisson(self.mass_between(eps, rho) * dt, rng);
    let mut buf = vec![0.0; self.d];
    for _ in 0..n {
      self.sample_jump(eps, rho, rng, &mut buf);
      for (o, b) in out.iter_mut().zip(&buf) {
        *o += b;
      }
    }
    n
  }

  /// Small-jump threshold for one step of length `dt`.
  ///
  /// The residual variance obeys `d sigma^2(eps) dt <= 0.1 l^2` with `l` the
  /// step scale, unless that would exceed `budget` expected jumps in
  /// `(eps, rho]`, in which case the budget wins.
  pub fn threshold(&self, dt: f64, rho: f64, budget: f64) -> f64 {
    let l = self.step_scale(dt);
    let var_ok = |e: f64| self.small_variance(e) * self.d as f64 * dt <= 0.1 * l * l;
    let (mut lo, mut hi) = ((l * 1e-12).ln(), l.ln());
    if var_ok(hi.exp()) {
      lo = hi;
    }
    for _ in 0..200 {
      let mid = 0.5 * (lo + hi);
      if var_ok(mid.exp()) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    let eps_rule = lo.exp();
    let eps_budget = if self.mass_between(eps_rule, rho) * dt <= budget {
      eps_rule
    } else {
      let (mut lo, mut hi) = (eps_rule.ln(), rho.ln());
      for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if self.mass_between(mid.exp(), rho) * dt > budget {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      hi.exp()
    };
    eps_rule.max(eps_budget).min(rho)
  }
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn one_dim_tail_closed_form() {
    let l = PowerLevy { d: 1, density: PowerDensity::stable(1.0, 1.5), axis: false };
    assert!((l.tail(1.0) - 2.0 / 1.5).abs() < 1e-14);
    assert!((l.tail(0.5) - (2.0 / 1.5) * 0.5f64.powf(-1.5)).abs() < 1e-12);
    // h = (2/0.5 + 2/1.5) r^{-1.5}
    assert!((l.pruitt_h(2.0) - 2f64.powf(-1.5) * 16.0 / 3.0).abs() < 1e-12);
  }

  #[test]
  fn axis_tail() {
    let l = PowerLevy { d: 2, density: PowerDensity::stable(1.0, 1.2), axis: true };
    assert!((l.tail(0.7) - 2.0 * 2.0 * 0.7f64.powf(-1.2) / 1.2).abs() < 1e-12);
  }
}
