//! Feller symbols of the implemented families, the scale `Phi(x, r)`, the
//! Pruitt function `h(x, r)`, Lévy tails recovered from a symbol, and grid
//! checks of the local conditions (O1)–(O4).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{one_minus_cos_moment, sphere_area, stable_density_constant, Real};
use crate::quadrature::Integrator;
use crate::scale::{log_grid, TabulatedScale};
use crate::special::{si_complement, truncated_moment_kernel};
use crate::stats::{wilson, Z95};

/// A scalar coefficient field `R^d -> R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Field {
  Constant {
    value: f64,
  },
  /// Piecewise constant on axis-aligned boxes; the first box containing `x`
  /// wins, `default` elsewhere.
  Boxes {
    default: f64,
    boxes: Vec<BoxValue>,
  },
  /// `base + (peak - base) * psi(|x - center| / radius)` with the standard
  /// smooth bump `psi(s) = exp(1 - 1 / (1 - s^2))` on `s < 1`.
  Bump {
    base: f64,
    peak: f64,
    center: Vec<f64>,
    radius: f64,
  },
  /// `from + (to - from) * (1 + tanh((x_1 - center) / width)) / 2`.
  Ramp {
    from: f64,
    to: f64,
    center: f64,
    width: f64,
  },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxValue {
  pub lo: Vec<f64>,
  pub hi: Vec<f64>,
  pub value: f64,
}

impl Field {
  pub fn constant(value: f64) -> Self {
    Field::Constant { value }
  }

  pub fn at(&self, x: &[f64]) -> f64 {
    match self {
      Field::Constant { value } => *value,
      Field::Boxes { default, boxes } => boxes
        .iter()
        .find(|b| {
          x.iter().enumerate().all(|(i, &xi)| xi >= b.lo[i.min(b.lo.len() - 1)] && xi < b.hi[i.min(b.hi.len() - 1)])
        })
        .map_or(*default, |b| b.value),
      Field::Bump { base, peak, center, radius } => {
        let s2: f64 = x
          .iter()
          .enumerate()
          .map(|(i, &xi)| {
            let c = center.get(i).copied().unwrap_or(0.0);
            (xi - c) * (xi - c)
          })
          .sum::<f64>()
          / (radius * radius);
        if s2 >= 1.0 {
          *base
        } else {
          base + (peak - base) * (1.0 - 1.0 / (1.0 - s2)).exp()
        }
      }
      Field::Ramp { from, to, center, width } => from + (to - from) * 0.5 * (1.0 + ((x[0] - center) / width).tanh()),
    }
  }

  /// Whether the field is constant everywhere.
  pub fn is_constant(&self) -> bool {
    match self {
      Field::Constant { .. } => true,
      Field::Boxes { default, boxes } => boxes.iter().all(|b| b.value == *default),
      Field::Bump { base, peak, .. } => base == peak,
      Field::Ramp { from, to, .. } => from == to,
    }
  }

  /// `(min, max)` over sample points of the box `[lo, hi]^d`.
  pub fn range_on(&self, lo: &[f64], hi: &[f64], per_axis: usize) -> (f64, f64) {
    let pts = box_grid(lo, hi, per_axis);
    pts.iter().map(|p| self.at(p)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
  }

  /// Empirical Hölder constant `max |f(x) - f(y)| / |x - y|^theta` over a grid
  /// of the box.
  pub fn holder_constant(&self, lo: &[f64], hi: &[f64], theta: f64, per_axis: usize) -> f64 {
    let pts = box_grid(lo, hi, per_axis);
    let vals: Vec<f64> = pts.iter().map(|p| self.at(p)).collect();
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
      for j in i + 1..pts.len() {
        let dist = crate::num::dist(&pts[i], &pts[j]);
        if dist > 0.0 {
          best = best.max((vals[i] - vals[j]).abs() / dist.powf(theta));
        }
      }
    }
    best
  }
}

/// Tensor grid with `per_axis` points per coordinate.
pub fn box_grid(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
  let d = lo.len();
  let n = per_axis.max(1);
  let axis = |k: usize, i: usize| {
    if n == 1 {
      0.5 * (lo[k] + hi[k])
    } else {
      lo[k] + (hi[k] - lo[k]) * i as f64 / (n - 1) as f64
    }
  };
  let total = n.pow(d as u32);
  (0..total)
    .map(|mut idx| {
      (0..d)
        .map(|k| {
          let i = idx % n;
          idx /= n;
          axis(k, i)
        })
        .collect()
    })
    .collect()
}

/// `c |z|^{-d-alpha}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
  pub c: f64,
  pub alpha: f64,
}

/// Radial Lévy density `nu(z) = sum_i c_i |z|^{-d-alpha_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerDensity {
  pub terms: Vec<PowerTerm>,
}

impl PowerDensity {
  pub fn stable(c: f64, alpha: f64) -> Self {
    Self { terms: vec![PowerTerm { c, alpha }] }
  }

  pub fn validate(&self) -> Result<()> {
    if self.terms.is_empty() {
      return Err(Error::NonLevy("density without terms".into()));
    }
    for t in &self.terms {
      if !(t.alpha > 0.0 && t.alpha < 2.0) || !(t.c > 0.0) {
        return Err(Error::NonLevy(format!("term c={} alpha={} is not integrable against 1 ^ |z|^2", t.c, t.alpha)));
      }
    }
    Ok(())
  }

  /// Density at radius `s` in dimension `d`.
  pub fn value(&self, s: f64, d: usize) -> f64 {
    self.terms.iter().map(|t| t.c * s.powf(-(d as f64) - t.alpha)).sum()
  }

  /// One-sided 1d tail `int_s^inf nu(z) dz`.
  pub fn half_tail(&self, s: f64) -> f64 {
    self.terms.iter().map(|t| t.c * s.powf(-t.alpha) / t.alpha).sum()
  }

  /// One-sided 1d moment `int_0^s z^2 nu(z) dz`.
  pub fn half_second_moment(&self, s: f64) -> f64 {
    self.terms.iter().map(|t| t.c * s.powf(2.0 - t.alpha) / (2.0 - t.alpha)).sum()
  }

  /// One-sided `int_a^b z nu(z) dz` for `0 < a < b`.
  pub fn half_first_moment(&self, a: f64, b: f64) -> f64 {
    self
      .terms
      .iter()
      .map(|t| {
        if (t.alpha - 1.0).abs() < 1e-12 {
          t.c * (b / a).ln()
        } else {
          t.c * (a.powf(1.0 - t.alpha) - b.powf(1.0 - t.alpha)) / (t.alpha - 1.0)
        }
      })
      .sum()
  }

  /// Radial tail `nu(|z| > s)` in dimension `d`.
  pub fn tail(&self, s: f64, d: usize) -> f64 {
    sphere_area(d) * self.half_tail(s)
  }

  /// Smallest and largest index.
  pub fn index_range(&self) -> (f64, f64) {
    self.terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t.alpha), b.max(t.alpha)))
  }
}

/// Compensator convention of the non-symmetric kernel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
  /// Compensated on `|z| <= 1`; requires lower scaling index above 1.
  P1,
  /// Uncompensated; requires upper scaling index below 1.
  P2,
  /// Symmetric kernel.
  P3,
}

/// Symbols `q(x, xi)` of the implemented Feller families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSpec {
  /// `|xi|^{alpha(x)} (log(1 + |xi|))^{gamma(x)}`.
  VaryingOrder { d: usize, alpha: Field, gamma: Field },
  /// `sum_i |xi_i|^{alpha(x)}`.
  CylindricalStable { d: usize, alpha: Field },
  /// One-dimensional kernel `kappa(x, z) J(|z|)` with `kappa = kappa_plus` on
  /// `z > 0` and `kappa_minus` on `z < 0`.
  LevyKernel { kappa_plus: Field, kappa_minus: Field, density: PowerDensity, regime: Regime },
  /// Translation-invariant triplet. With `axis = true` the density lives on
  /// the coordinate axes: `sum_i nu_1(z_i) dz_i`.
  PureLevy {
    d: usize,
    #[serde(default)]
    density: Option<PowerDensity>,
    #[serde(default)]
    axis: bool,
    /// Gaussian matrix `a`; empty means zero.
    #[serde(default)]
    gaussian: Vec<Vec<f64>>,
    /// Drift `b`; empty means zero.
    #[serde(default)]
    drift: Vec<f64>,
  },
}

/// Characteristics frozen at a point: what the Euler scheme needs.
#[derive(Debug, Clone, PartialEq)]
pub enum Frozen {
  /// `|xi|^alpha (log(1 + |xi|))^gamma`, radial.
  VaryingOrder { alpha: f64, gamma: f64 },
  /// `sum_i |xi_i|^alpha`.
  Cylindrical { alpha: f64 },
  /// 1d kernel with side weights.
  Kernel { plus: f64, minus: f64, density: PowerDensity, regime: Regime },
}

impl SymbolSpec {
  pub fn dim(&self) -> usize {
    match self {
      SymbolSpec::VaryingOrder { d, .. } | SymbolSpec::CylindricalStable { d, .. } | SymbolSpec::PureLevy { d, .. } => {
        *d
      }
      SymbolSpec::LevyKernel { .. } => 1,
    }
  }

  /// Standard Brownian symbol `|xi|^2` in `R^d` (`a = I`).
  pub fn brownian(d: usize) -> Self {
    SymbolSpec::PureLevy {
      d,
      density: None,
      axis: false,
      gaussian: (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
      drift: vec![],
    }
  }

  /// 1d `nu(z) = c |z|^{-1-alpha}` without Gaussian part or drift.
  pub fn stable_density_1d(c: f64, alpha: f64) -> Self {
    SymbolSpec::PureLevy {
      d: 1,
      density: Some(PowerDensity::stable(c, alpha)),
      axis: false,
      gaussian: vec![],
      drift: vec![],
    }
  }

  /// Checks pointwise invariants on a grid of the box `[lo, hi]`.
  pub fn validate_on(&self, lo: &[f64], hi: &[f64]) -> Result<()> {
    let d = self.dim();
    if d == 0 || lo.len() != d || hi.len() != d {
      return Err(Error::InvalidArgument(format!("region must have dimension {d}")));
    }
    let pts = box_grid(lo, hi, if d == 1 { 201 } else { 21 });
    match self {
      SymbolSpec::VaryingOrder { alpha, gamma, .. } => {
        for p in &pts {
          let (a, g) = (alpha.at(p), gamma.at(p));
          if !(a > 0.0 && a < 2.0) || !(g > -1.0 && g < 1.0) {
            return Err(Error::OutOfRange { what: "alpha or gamma", value: a, lo: 0.0, hi: 2.0 });
          }
          let s = a / 2.0 + g;
          if !(-1e-12..=1.0 + 1e-12).contains(&s) {
            return Err(Error::OutOfRange { what: "alpha/2 + gamma", value: s, lo: 0.0, hi: 1.0 });
          }
        }
      }
      SymbolSpec::CylindricalStable { alpha, .. } => {
        for p in &pts {
          let a = alpha.at(p);
          if !(a > 0.0 && a < 2.0) {
            return Err(Error::OutOfRange { what: "alpha", value: a, lo: 0.0, hi: 2.0 });
          }
        }
      }
      SymbolSpec::LevyKernel { kappa_plus, kappa_minus, density, regime } => {
        density.validate()?;
        let (a_lo, a_hi) = density.index_range();
        match regime {
          Regime::P1 if a_lo <= 1.0 => {
            return Err(Error::InvalidArgument(format!("regime p1 needs indices above 1, got {a_lo}")))
          }
          Regime::P2 if a_hi >= 1.0 => {
            return Err(Error::InvalidArgument(format!("regime p2 needs indices below 1, got {a_hi}")))
          }
          Regime::P3 if kappa_plus != kappa_minus => {
            return Err(Error::InvalidArgument("regime p3 needs a symmetric kernel".into()))
          }
          _ => {}
        }
        for p in &pts {
          for k in [kappa_plus.at(p), kappa_minus.at(p)] {
            if !(k > 0.0 && k.is_finite()) {
              return Err(Error::OutOfRange { what: "kappa", value: k, lo: 0.0, hi: f64::INFINITY });
            }
          }
        }
      }
      SymbolSpec::PureLevy { density, gaussian, drift, .. } => {
        if let Some(dens) = density {
          dens.validate()?;
        }
        if !gaussian.is_empty() && (gaussian.len() != d || gaussian.iter().any(|r| r.len() != d)) {
          return Err(Error::InvalidArgument(format!("gaussian matrix must be {d}x{d}")));
        }
        if !drift.is_empty() && drift.len() != d {
          return Err(Error::InvalidArgument(format!("drift must have length {d}")));
        }
      }
    }
    Ok(())
  }

  /// Characteristics frozen at `x` (state-dependent families only).
  pub fn freeze(&self, x: &[f64]) -> Option<Frozen> {
    match self {
      SymbolSpec::VaryingOrder { alpha, gamma, .. } => {
        Some(Frozen::VaryingOrder { alpha: alpha.at(x), gamma: gamma.at(x) })
      }
      SymbolSpec::CylindricalStable { alpha, .. } => Some(Frozen::Cylindrical { alpha: alpha.at(x) }),
      SymbolSpec::LevyKernel { kappa_plus, kappa_minus, density, regime } => Some(Frozen::Kernel {
        plus: kappa_plus.at(x),
        minus: kappa_minus.at(x),
        density: density.clone(),
        regime: *regime,
      }),
      SymbolSpec::PureLevy { .. } => None,
    }
  }
}

fn integrator<T: Real>() -> Integrator<T> {
  Integrator::default()
}

/// `1 - cos(u)` without cancellation.
fn one_minus_cos<T: Real>(u: T) -> T {
  let s = (u * T::lit(0.5)).sin();
  T::lit(2.0) * s * s
}

/// `int_a^inf f` for integrands oscillating with half period `hp`: the first
/// stretch runs to the next multiple of `hp`, the rest is tail-summed.
fn oscillatory_from<T: Real, F: Fn(T) -> T>(q: &Integrator<T>, f: F, a: T, hp: T) -> Result<T> {
  let k = (a / hp).ceil() + T::one();
  let b = k * hp;
  let head = q.integrate(&f, a, b)?;
  Ok(head + q.oscillatory_tail(&f, b, hp)?)
}

/// `2 int_0^inf (1 - cos(k z)) nu(z) dz` for a 1d density.
fn re_levy_1d<T: Real>(dens: &PowerDensity, k: T) -> Result<T> {
  if k == T::zero() {
    return Ok(T::zero());
  }
  let q = integrator::<T>();
  let nu = |z: T| T::lit(dens.value(z.f64(), 1));
  let hp = T::PI() / k;
  let head = q.integrate_from_zero(|z| one_minus_cos(k * z) * nu(z), hp)?;
  let mass = T::lit(dens.half_tail(hp.f64()));
  let osc = oscillatory_from(&q, |z| (k * z).cos() * nu(z), hp, hp)?;
  Ok(T::lit(2.0) * (head + mass - osc))
}

/// `int_0^inf min(z^2/r^2, 1) nu(z) dz` for a 1d density, split at `r`.
fn h_levy_half_1d<T: Real>(dens: &PowerDensity, r: T) -> Result<T> {
  let q = integrator::<T>();
  let nu = |z: T| T::lit(dens.value(z.f64(), 1));
  let inner = q.integrate_from_zero(|z| z * z * nu(z), r)? / (r * r);
  let outer = q.integrate_to_infinity(nu, r)?;
  Ok(inner + outer)
}

/// `q(xi) = |xi|^alpha (log(1+|xi|))^gamma` and its radial derivative.
fn varying_order<T: Real>(alpha: T, gamma: T, k: T) -> (T, T) {
  if k <= T::zero() {
    return (T::zero(), T::zero());
  }
  let l = k.ln_1p();
  let q = k.powf(alpha) * l.powf(gamma);
  let dq = alpha * k.powf(alpha - T::one()) * l.powf(gamma)
    + gamma * k.powf(alpha) * l.powf(gamma - T::one()) / (T::one() + k);
  (q, dq)
}

/// Lévy constant `c` with `2 int_0^inf (1 - cos(xi z)) c |z|^{-1-alpha} dz = |xi|^alpha`.
fn unit_stable_constant(alpha: f64) -> f64 {
  stable_density_constant(alpha, 1)
}

/// Real part of the symbol.
pub fn re_symbol<T: Real>(spec: &SymbolSpec, x: &[T], xi: &[T]) -> Result<T> {
  let xf: Vec<f64> = x.iter().map(|v| v.f64()).collect();
  let k = crate::num::norm(xi);
  if k == T::zero() {
    return Ok(T::zero());
  }
  match spec {
    SymbolSpec::VaryingOrder { alpha, gamma, .. } => {
      Ok(varying_order(T::lit(alpha.at(&xf)), T::lit(gamma.at(&xf)), k).0)
    }
    SymbolSpec::CylindricalStable { alpha, .. } => {
      let a = T::lit(alpha.at(&xf));
      Ok(xi.iter().fold(T::zero(), |s, &v| s + v.abs().powf(a)))
    }
    SymbolSpec::LevyKernel { kappa_plus, kappa_minus, density, .. } => {
      let w = T::lit(kappa_plus.at(&xf) + kappa_minus.at(&xf));
      Ok(w * re_levy_1d(density, k)? / T::lit(2.0))
    }
    SymbolSpec::PureLevy { d, density, axis, gaussian, .. } => {
      let mut total = T::zero();
      for (i, row) in gaussian.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
          total = total + xi[i] * T::lit(a) * xi[j];
        }
      }
      if let Some(dens) = density {
        if *axis {
          for &v in xi {
            total = total + closed_stable_1d(dens, v.abs());
          }
        } else if *d == 1 {
          total = total + re_levy_1d(dens, k)?;
        } else {
          for t in &dens.terms {
            total = total + T::lit(t.c / stable_density_constant(t.alpha, *d)) * k.powf(T::lit(t.alpha));
          }
        }
      }
      Ok(total)
    }
  }
}

/// `2 int_0^inf (1 - cos(k z)) nu(z) dz` in closed form for a power density.
fn closed_stable_1d<T: Real>(dens: &PowerDensity, k: T) -> T {
  dens.terms.iter().fold(T::zero(), |s, t| s + T::lit(t.c / unit_stable_constant(t.alpha)) * k.powf(T::lit(t.alpha)))
}

/// Imaginary part of the symbol (zero for every symmetric family).
pub fn im_symbol<T: Real>(spec: &SymbolSpec, x: &[T], xi: &[T]) -> Result<T> {
  let xf: Vec<f64> = x.iter().map(|v| v.f64()).collect();
  match spec {
    SymbolSpec::LevyKernel { kappa_plus, kappa_minus, density, regime } => {
      let skew = T::lit(kappa_plus.at(&xf) - kappa_minus.at(&xf));
      let k = xi[0];
      if skew == T::zero() || k == T::zero() || *regime == Regime::P3 {
        return Ok(T::zero());
      }
      let q = integrator::<T>();
      let nu = |z: T| T::lit(density.value(z.f64(), 1));
      let hp = T::PI() / k.abs();
      let value = match regime {
        Regime::P1 => {
          // int_0^1 (k z - sin k z) nu - int_1^inf sin(k z) nu
          let small = q.integrate_from_zero(|z| (k * z - (k * z).sin()) * nu(z), T::one())?;
          small - oscillatory_from(&q, |z| (k * z).sin() * nu(z), T::one(), hp)?
        }
        _ => {
          -(q.integrate_from_zero(|z| (k * z).sin() * nu(z), hp)?
            + oscillatory_from(&q, |z| (k * z).sin() * nu(z), hp, hp)?)
        }
      };
      Ok(skew * value)
    }
    SymbolSpec::PureLevy { drift, .. } => Ok(-drift.iter().zip(xi).fold(T::zero(), |s, (&b, &v)| s + T::lit(b) * v)),
    _ => Ok(T::zero()),
  }
}

/// Magnitude grid for the supremum in `Phi`: `per_decade` points over
/// `decades` decades below `k_max`.
fn magnitudes<T: Real>(k_max: T, decades: usize, per_decade: usize) -> Vec<T> {
  log_grid(k_max * T::lit(10f64.powi(-(decades as i32))), k_max, per_decade)
}

/// `Phi(x, r) = 1 / sup_{|xi| <= 1/r} Re q(x, xi)`.
pub fn phi_from_symbol<T: Real>(spec: &SymbolSpec, x: &[T], r: T) -> Result<T> {
  if !(r > T::zero()) {
    return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
  }
  let d = spec.dim();
  let kmax = T::one() / r;
  let xf: Vec<f64> = x.iter().map(|v| v.f64()).collect();
  let sup = match spec {
    SymbolSpec::CylindricalStable { alpha, .. } => {
      // Sum of |xi_i|^a over the sphere peaks on the diagonal for a < 2.
      let a = T::lit(alpha.at(&xf));
      let df = T::from_usize(d).unwrap();
      df.powf(T::one() - a / T::lit(2.0)) * kmax.powf(a)
    }
    SymbolSpec::PureLevy { axis: true, density: Some(dens), gaussian, .. } => {
      let df = T::from_usize(d).unwrap();
      let jumps = dens.terms.iter().fold(T::zero(), |s, t| {
        let a = T::lit(t.alpha);
        s + T::lit(t.c / unit_stable_constant(t.alpha)) * df.powf(T::one() - a / T::lit(2.0)) * kmax.powf(a)
      });
      jumps + T::lit(operator_norm(gaussian)) * kmax * kmax
    }
    _ => {
      let (decades, per) = match spec {
        SymbolSpec::LevyKernel { .. } | SymbolSpec::PureLevy { d: 1, density: Some(_), .. } => (2, 16),
        _ => (6, 64),
      };
      let mut best = T::zero();
      let mut xi = vec![T::zero(); d];
      for k in magnitudes(kmax, decades, per) {
        xi[0] = k;
        best = best.max(re_symbol(spec, x, &xi)?);
      }
      best
    }
  };
  if !(sup > T::zero()) {
    return Ok(T::infinity());
  }
  Ok(T::one() / sup)
}

/// Tabulates `r -> Phi(x, r)` on a log grid.
pub fn phi_table<T: Real>(
  spec: &SymbolSpec,
  x: &[T],
  r_min: T,
  r_max: T,
  per_decade: usize,
) -> Result<TabulatedScale<T>> {
  TabulatedScale::try_from_fn(|r| phi_from_symbol(spec, x, r), r_min, r_max, per_decade)
}

/// Largest eigenvalue of a symmetric nonnegative matrix (power iteration).
pub fn operator_norm(a: &[Vec<f64>]) -> f64 {
  let n = a.len();
  if n == 0 {
    return 0.0;
  }
  let mut v = vec![1.0 / (n as f64).sqrt(); n];
  let mut lambda = 0.0;
  for _ in 0..500 {
    let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i][j] * v[j]).sum()).collect();
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
      return 0.0;
    }
    let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
    let converged = (norm - lambda).abs() <= 1e-14 * norm;
    lambda = norm;
    v = next;
    if converged {
      break;
    }
  }
  lambda
}

/// Pruitt function of a power density in `R^d`, closed form.
fn h_power<T: Real>(dens: &PowerDensity, d: usize, r: T) -> T {
  let sd = T::lit(sphere_area(d));
  dens.terms.iter().fold(T::zero(), |s, t| {
    let a = T::lit(t.alpha);
    s + T::lit(t.c) * sd * r.powf(-a) * (T::one() / (T::lit(2.0) - a) + T::one() / a)
  })
}

/// 1d symmetric `h(r)` from the radial symbol through
/// `h(r) = (2 / (pi r)) int_0^inf q'(u/r) K(u) du`.
fn h_from_radial_symbol<T: Real, Q: Fn(T) -> (T, T)>(symbol: Q, r: T) -> Result<T> {
  let q = Integrator::with_rel_tol(T::default_rel_tol() * T::lit(10.0));
  let f = |u: T| symbol(u / r).1 * truncated_moment_kernel(u);
  let head = q.integrate_from_zero(f, T::PI())?;
  let tail = q.oscillatory_tail(f, T::PI(), T::PI())?;
  Ok(T::lit(2.0) / (T::PI() * r) * (head + tail))
}

/// 1d symmetric tail `nu(|z| > s) = (2 / (pi s)) int_0^inf q'(u/s) (pi/2 - Si(u)) du`.
fn tail_from_radial_symbol<T: Real, Q: Fn(T) -> (T, T)>(symbol: Q, s: T) -> Result<T> {
  let q = Integrator::with_rel_tol(T::default_rel_tol() * T::lit(10.0));
  let f = |u: T| symbol(u / s).1 * si_complement(u);
  let head = q.integrate_from_zero(f, T::PI())?;
  let tail = q.oscillatory_tail(f, T::PI(), T::PI())?;
  Ok(T::lit(2.0) / (T::PI() * s) * (head + tail))
}

/// `h(x, r) = ||a(x)|| / r^2 + int min(|z|^2/r^2, 1) nu(x, dz)`.
pub fn pruitt_h<T: Real>(spec: &SymbolSpec, x: &[T], r: T) -> Result<T> {
  if !(r > T::zero()) {
    return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
  }
  let xf: Vec<f64> = x.iter().map(|v| v.f64()).collect();
  match spec {
    SymbolSpec::VaryingOrder { d, alpha, gamma } => {
      let (a, g) = (alpha.at(&xf), gamma.at(&xf));
      if !(a > 0.0 && a < 2.0) {
        return Err(Error::NonLevy(format!("alpha = {a}")));
      }
      if g == 0.0 {
        let dens = PowerDensity::stable(stable_density_constant(a, *d), a);
        return Ok(h_power(&dens, *d, r));
      }
      if *d != 1 {
        return Err(Error::Unsupported("h for log-corrected symbols is implemented in one dimension".into()));
      }
      let (ta, tg) = (T::lit(a), T::lit(g));
      h_from_radial_symbol(|k| varying_order(ta, tg, k), r)
    }
    SymbolSpec::CylindricalStable { d, alpha } => {
      let a = alpha.at(&xf);
      let dens = PowerDensity::stable(unit_stable_constant(a), a);
      Ok(T::from_usize(*d).unwrap() * h_power(&dens, 1, r))
    }
    SymbolSpec::LevyKernel { kappa_plus, kappa_minus, density, .. } => {
      density.validate()?;
      let w = T::lit(kappa_plus.at(&xf) + kappa_minus.at(&xf));
      Ok(w * h_levy_half_1d(density, r)?)
    }
    SymbolSpec::PureLevy { d, density, axis, gaussian, .. } => {
      let mut h = T::lit(operator_norm(gaussian)) / (r * r);
      if let Some(dens) = density {
        dens.validate()?;
        h = h
          + if *axis {
            T::from_usize(*d).unwrap() * h_power(dens, 1, r)
          } else if *d == 1 {
            T::lit(2.0) * h_levy_half_1d(dens, r)?
          } else {
            h_power(dens, *d, r)
          };
      }
      Ok(h)
    }
  }
}

/// Lévy tail `nu(x, {|z| > s})`.
pub fn levy_tail<T: Real>(spec: &SymbolSpec, x: &[T], s: T) -> Result<T> {
  let xf: Vec<f64> = x.iter().map(|v| v.f64()).collect();
  let sf = s.f64();
  match spec {
    SymbolSpec::VaryingOrder { d, alpha, gamma } => {
      let (a, g) = (alpha.at(&xf), gamma.at(&xf));
      if g == 0.0 {
        return Ok(T::lit(stable_density_constant(a, *d) * sphere_area(*d) * sf.powf(-a) / a));
      }
      if *d != 1 {
        return Err(Error::Unsupported("tails of log-corrected symbols are implemented in one dimension".into()));
      }
      let (ta, tg) = (T::lit(a), T::lit(g));
      tail_from_radial_symbol(|k| varying_order(ta, tg, k), s)
    }
    SymbolSpec::CylindricalStable { d, alpha } => {
      let a = alpha.at(&xf);
      Ok(T::lit(*d as f64 * 2.0 * unit_stable_constant(a) * sf.powf(-a) / a))
    }
    SymbolSpec::LevyKernel { kappa_plus, kappa_minus, density, .. } => {
      Ok(T::lit((kappa_plus.at(&xf) + kappa_minus.at(&xf)) * density.half_tail(sf)))
    }
    SymbolSpec::PureLevy { d, density, axis, .. } => Ok(T::lit(match density {
      None => 0.0,
      Some(dens) if *axis => *d as f64 * 2.0 * dens.half_tail(sf),
      Some(dens) => dens.tail(sf, *d),
    })),
  }
}

/// Numerically recovered symmetric 1d Lévy measure of a log-corrected
/// symbol, tabulated for jump sampling.
#[derive(Debug, Clone)]
pub struct NumericLevy1d {
  /// Increasing `ln s`.
  ln_s: Vec<f64>,
  /// `ln nu(|z| > s)`, decreasing.
  ln_tail: Vec<f64>,
  /// `ln int_{|z| <= s} z^2 nu(dz)` at each grid point.
  ln_small_var: Vec<f64>,
}

impl NumericLevy1d {
  /// Tabulates tail and truncated variance of `|xi|^alpha log(1+|xi|)^gamma`
  /// for `s` in `[s_min, s_max]`.
  pub fn new(alpha: f64, gamma: f64, s_min: f64, s_max: f64, per_decade: usize) -> Result<Self> {
    let grid = log_grid(s_min, s_max, per_decade);
    let mut ln_s = Vec::with_capacity(grid.len());
    let mut ln_tail = Vec::with_capacity(grid.len());
    let mut small_var = Vec::with_capacity(grid.len());
    let sym = |k: f64| varying_order(alpha, gamma, k);
    for &s in &grid {
      let t = tail_from_radial_symbol(sym, s)?;
      let h = h_from_radial_symbol(sym, s)?;
      if !(t > 0.0) {
        return Err(Error::QuadratureFailure(format!("non-positive tail {t} at s = {s}")));
      }
      ln_s.push(s.ln());
      ln_tail.push(t.ln());
      small_var.push((s * s * (h - t)).max(f64::MIN_POSITIVE).ln());
    }
    for i in 1..ln_tail.len() {
      if ln_tail[i] >= ln_tail[i - 1] {
        return Err(Error::NonMonotone { index: i });
      }
    }
    Ok(Self { ln_s, ln_tail, ln_small_var: small_var })
  }

  pub fn s_min(&self) -> f64 {
    self.ln_s[0].exp()
  }

  fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + w * (ys[k] - ys[k - 1])
  }

  /// `nu(|z| > s)`, extrapolated as a power law beyond the grid.
  pub fn tail(&self, s: f64) -> f64 {
    Self::interp(&self.ln_s, &self.ln_tail, s.ln()).exp()
  }

  /// `int_{|z| <= s} z^2 nu(dz)`; power-law extrapolated below the grid.
  pub fn small_variance(&self, s: f64) -> f64 {
    Self::interp(&self.ln_s, &self.ln_small_var, s.ln()).exp()
  }

  /// Jump size `s >= eps` with `nu(|z| > s) = u * nu(|z| > eps)`.
  pub fn inverse_tail(&self, target: f64) -> f64 {
    let lt = target.ln();
    // ln_tail decreasing: reverse for interpolation.
    let n = self.ln_tail.len();
    let k = self.ln_tail.partition_point(|&v| v > lt).clamp(1, n - 1);
    let (y0, y1) = (self.ln_tail[k - 1], self.ln_tail[k]);
    let w = (lt - y0) / (y1 - y0);
    (self.ln_s[k - 1] + w * (self.ln_s[k] - self.ln_s[k - 1])).exp()
  }
}

/// Result of [`verify_phi_h_sandwich`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
  /// `(x, r, 2 h Phi)` triples.
  pub points: Vec<(Vec<f64>, f64, f64)>,
  pub min_ratio: f64,
  pub max_ratio: f64,
  pub tol: f64,
  pub c_max: f64,
  pub passed: bool,
}

/// Evaluates `2 h(x, r) Phi(x, r)` over a grid of centers and radii.
pub fn verify_phi_h_sandwich(spec: &SymbolSpec, xs: &[Vec<f64>], r_grid: &[f64], c_max: f64) -> Result<SandwichReport> {
  const TOL: f64 = 1e-3;
  let mut points = Vec::new();
  let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
  for x in xs {
    for &r in r_grid {
      let ratio = 2.0 * pruitt_h(spec, x, r)? * phi_from_symbol(spec, x, r)?;
      lo = lo.min(ratio);
      hi = hi.max(ratio);
      points.push((x.clone(), r, ratio));
    }
  }
  Ok(SandwichReport { points, min_ratio: lo, max_ratio: hi, tol: TOL, c_max, passed: lo >= 1.0 - TOL && hi <= c_max })
}

/// Box region `U` and evaluation grids for [`check_conditions_o`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OGrids {
  pub lo: Vec<f64>,
  pub hi: Vec<f64>,
  pub centers_per_axis: usize,
  /// Radii `r = 1/|xi|`.
  pub radii: Vec<f64>,
  /// Points sampled per `y`-ball in (O3).
  pub ball_points: usize,
  /// Paths per direction in (O4).
  pub o4_paths: usize,
  /// (O4) time as a fraction of `Phi(x, r_max)`.
  pub o4_time_fraction: f64,
  /// Maximal acceptable Wilson half-width in (O4).
  pub o4_max_half_width: f64,
  pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
  pub passed: bool,
  /// Fitted constant (`C_9`, `C_10`, `C_11`); `None` for (O1).
  pub constant: Option<f64>,
  pub grid_size: usize,
  pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOReport {
  pub o1: Verdict,
  pub o2: Verdict,
  pub o3: Verdict,
  pub o4: Verdict,
  pub passed: bool,
}

/// Grid evidence for (O1)–(O4) on the box `U`.
pub fn check_conditions_o(spec: &SymbolSpec, grids: &OGrids) -> Result<ConditionOReport> {
  spec.validate_on(&grids.lo, &grids.hi)?;
  let d = spec.dim();
  let centers = box_grid(&grids.lo, &grids.hi, grids.centers_per_axis);
  let mut radii = grids.radii.clone();
  radii.sort_by(f64::total_cmp);

  // (O1): Phi increasing along the grid and collapsing towards r -> 0.
  let mut o1_ok = true;
  let mut worst_drop: f64 = 0.0;
  for x in &centers {
    let phis = radii.iter().map(|&r| phi_from_symbol(spec, x, r)).collect::<Result<Vec<f64>>>()?;
    if phis.windows(2).any(|w| !(w[1] > w[0])) || !phis[0].is_finite() {
      o1_ok = false;
    }
    worst_drop = worst_drop.max(phis[0] / phis[phis.len() - 1]);
  }
  let o1 = Verdict {
    passed: o1_ok && worst_drop < 1.0,
    constant: None,
    grid_size: centers.len() * radii.len(),
    note: format!("max Phi(r_min)/Phi(r_max) = {worst_drop:.3e}"),
  };

  // (O2): sup_{|xi'| <= |xi|} Re q >= C_9 |Im q|.
  let mut c9 = f64::INFINITY;
  for x in &centers {
    for &r in &radii {
      let mut xi = vec![0.0; d];
      xi[0] = 1.0 / r;
      let im = im_symbol(spec, x, &xi)?.abs();
      for sign in [1.0, -1.0] {
        xi[0] = sign / r;
        let im_s = im_symbol(spec, x, &xi)?.abs().max(im);
        if im_s > 0.0 {
          let sup = 1.0 / phi_from_symbol(spec, x, r)?;
          c9 = c9.min(sup / im_s);
        }
      }
    }
  }
  let o2 = Verdict {
    passed: c9 > 0.0,
    constant: Some(c9),
    grid_size: centers.len() * radii.len(),
    note: if c9.is_infinite() { "imaginary part vanishes on the grid".into() } else { String::new() },
  };

  // (O3): inf / sup of Re q(y, xi) over |y - x| <= 1/|xi|.
  let mut c10 = f64::INFINITY;
  let offsets = box_grid(&vec![-1.0; d], &vec![1.0; d], grids.ball_points.max(2));
  for x in &centers {
    for &r in &radii {
      let mut xi = vec![0.0; d];
      xi[0] = 1.0 / r;
      let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
      for off in &offsets {
        if crate::num::norm(off) > 1.0 + 1e-12 {
          continue;
        }
        let y: Vec<f64> = x.iter().zip(off).map(|(a, o)| a + o * r).collect();
        let v = re_symbol(spec, &y, &xi)?;
        lo = lo.min(v);
        hi = hi.max(v);
      }
      c10 = c10.min(lo / hi);
    }
  }
  let o3 = Verdict {
    passed: c10 > 0.0,
    constant: Some(c10),
    grid_size: centers.len() * radii.len() * offsets.len(),
    note: String::new(),
  };

  // (O4): P(2 <X_t - x, z> <= -|X_t - x|) over directions z.
  let r_max = *radii.last().unwrap();
  let process =
    crate::samplers::ProcessSpec::StableLike { symbol: spec.clone(), step: crate::samplers::StepRule::default() };
  let dirs: Vec<Vec<f64>> = if d == 1 {
    vec![vec![1.0], vec![-1.0]]
  } else {
    (0..8)
      .map(|k| {
        let th = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
        let mut z = vec![0.0; d];
        z[0] = th.cos();
        z[1] = th.sin();
        z
      })
      .collect()
  };
  let n = grids.o4_paths;
  let mut c11 = f64::INFINITY;
  let mut widest: f64 = 0.0;
  for (ci, x) in centers.iter().enumerate() {
    let t = grids.o4_time_fraction * phi_from_symbol(spec, x, r_max)?;
    let ends = crate::samplers::sample_endpoints(
      &process,
      x,
      t,
      n,
      crate::rng::derive_seed(grids.seed, &format!("o4:{ci}")),
      1,
    )?;
    for z in &dirs {
      let hits = ends
        .iter()
        .filter(|e| {
          let dx: Vec<f64> = e.iter().zip(x).map(|(a, b)| a - b).collect();
          let dot: f64 = dx.iter().zip(z).map(|(a, b)| a * b).sum();
          2.0 * dot <= -crate::num::norm(&dx)
        })
        .count();
      let (_, lo, hi) = wilson(hits, n, Z95);
      widest = widest.max((hi - lo) / 2.0);
      c11 = c11.min(lo);
    }
  }
  if widest > grids.o4_max_half_width {
    return Err(Error::InsufficientSamples(format!(
      "(O4) Wilson half-width {widest:.3} exceeds {:.3} with {n} paths",
      grids.o4_max_half_width
    )));
  }
  let o4 = Verdict {
    passed: c11 > 0.0,
    constant: Some(c11),
    grid_size: centers.len() * dirs.len() * n,
    note: format!("lower 95% Wilson bound, half-width <= {widest:.3}"),
  };
  let passed = o1.passed && o2.passed && o3.passed && o4.passed;
  Ok(ConditionOReport { o1, o2, o3, o4, passed })
}

/// `c` in `q(xi) = c |xi|^alpha` for the 1d density `|z|^{-1-alpha}`.
pub fn stable_symbol_constant(alpha: f64) -> f64 {
  2.0 * one_minus_cos_moment(alpha)
}

#[cfg(test)]
mod tests {
  use super::*;

  fn feller(alpha: f64, gamma: f64) -> SymbolSpec {
    SymbolSpec::VaryingOrder { d: 1, alpha: Field::constant(alpha), gamma: Field::constant(gamma) }
  }

  #[test]
  fn varying_order_symbol_value() {
    let q: f64 = re_symbol(&feller(1.5, 0.5), &[0.0], &[2.0]).unwrap();
    assert!((q - 2f64.powf(1.5) * 3f64.ln().sqrt()).abs() < 1e-12);
  }

  #[test]
  fn cylindrical_symbol_value() {
    let s = SymbolSpec::CylindricalStable { d: 2, alpha: Field::constant(1.0) };
    let q: f64 = re_symbol(&s, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert!((q - 2.0).abs() < 1e-14);
  }

  #[test]
  fn stable_density_symbol_by_quadrature() {
    let s = SymbolSpec::stable_density_1d(1.0, 1.5);
    let c = stable_symbol_constant(1.5);
    for xi in [0.3, 1.0, 7.0] {
      let q: f64 = re_symbol(&s, &[0.0], &[xi]).unwrap();
      assert!((q / (c * xi.powf(1.5)) - 1.0).abs() < 1e-6, "xi={xi} q={q}");
    }
  }

  #[test]
  fn phi_closed_forms() {
    let p: f64 = phi_from_symbol(&feller(1.5, 0.5), &[0.0], 0.1).unwrap();
    assert!((p / (0.1f64.powf(1.5) / 11f64.ln().sqrt()) - 1.0).abs() < 1e-12);
    let bm = SymbolSpec::brownian(1);
    let p: f64 = phi_from_symbol(&bm, &[0.0], 0.3).unwrap();
    assert!((p - 0.09).abs() < 1e-14);
    let s = SymbolSpec::stable_density_1d(1.0, 1.5);
    let c = stable_symbol_constant(1.5);
    let p: f64 = phi_from_symbol(&s, &[0.0], 2.0).unwrap();
    assert!((p / (2f64.powf(1.5) / c) - 1.0).abs() < 1e-6);
  }

  #[test]
  fn pruitt_h_examples() {
    let s = SymbolSpec::stable_density_1d(1.0, 1.5);
    for r in [0.5, 1.0, 3.0] {
      let h: f64 = pruitt_h(&s, &[0.0], r).unwrap();
      assert!((h / (r.powf(-1.5) * 16.0 / 3.0) - 1.0).abs() < 1e-7);
    }
    let h: f64 = pruitt_h(&SymbolSpec::brownian(1), &[0.0], 2.0).unwrap();
    assert!((h - 0.25).abs() < 1e-14);
  }

  #[test]
  fn h_from_symbol_matches_density_for_stable() {
    // gamma = 0 takes the closed form; compare it with the symbol route.
    for &a in &[0.8, 1.2, 1.5, 1.8] {
      let closed: f64 = pruitt_h(&feller(a, 0.0), &[0.0], 0.7).unwrap();
      let numeric = h_from_radial_symbol(|k: f64| varying_order(a, 0.0, k), 0.7).unwrap();
      assert!((numeric / closed - 1.0).abs() < 1e-6, "alpha={a}: {numeric} vs {closed}");
      let tail = tail_from_radial_symbol(|k: f64| varying_order(a, 0.0, k), 0.7).unwrap();
      let closed_tail: f64 = levy_tail(&feller(a, 0.0), &[0.0], 0.7).unwrap();
      assert!((tail / closed_tail - 1.0).abs() < 1e-6, "alpha={a}: {tail} vs {closed_tail}");
    }
  }

  #[test]
  fn brownian_sandwich_is_two() {
    let rep = verify_phi_h_sandwich(&SymbolSpec::brownian(1), &[vec![0.0]], &[0.1, 1.0, 10.0], 100.0).unwrap();
    assert!((rep.min_ratio - 2.0).abs() < 1e-12 && (rep.max_ratio - 2.0).abs() < 1e-12);
  }

  #[test]
  fn symmetric_kernel_has_real_symbol() {
    let s = SymbolSpec::LevyKernel {
      kappa_plus: Field::constant(1.0),
      kappa_minus: Field::constant(1.0),
      density: PowerDensity::stable(1.0, 1.5),
      regime: Regime::P3,
    };
    assert_eq!(im_symbol(&s, &[0.0], &[3.0]).unwrap(), 0.0);
  }

  #[test]
  fn field_variants() {
    let f = Field::Boxes { default: 1.5, boxes: vec![BoxValue { lo: vec![-10.0], hi: vec![0.0], value: 1.2 }] };
    assert_eq!(f.at(&[-1.0]), 1.2);
    assert_eq!(f.at(&[0.0]), 1.5);
    let b = Field::Bump { base: 1.0, peak: 2.0, center: vec![0.0], radius: 1.0 };
    assert!((b.at(&[0.0]) - 2.0).abs() < 1e-15);
    assert_eq!(b.at(&[1.5]), 1.0);
    let r = Field::Ramp { from: 1.2, to: 1.8, center: 0.0, width: 1.0 };
    assert!((r.at(&[0.0]) - 1.5).abs() < 1e-15);
    assert!(r.holder_constant(&[-2.0], &[2.0], 1.0, 41) <= 0.3 + 1e-9);
  }
}
