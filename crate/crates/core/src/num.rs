//! Scalar abstraction shared by the deterministic numerics.
//!
//! Quadrature, tabulated scales and closed-form symbols are written against
//! [`Real`] so they run in `f32` or `f64`. Monte Carlo code stays in `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Real:
  Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
  /// Lossy conversion from an `f64` literal or parameter.
  #[inline]
  fn lit(v: f64) -> Self {
    Self::from_f64(v).expect("f64 literal representable")
  }

  #[inline]
  fn f64(self) -> f64 {
    self.to_f64().unwrap_or(f64::NAN)
  }

  /// Relative tolerance that is meaningful for this precision.
  fn default_rel_tol() -> Self;
}

impl Real for f32 {
  fn default_rel_tol() -> Self {
    1e-5
  }
}

impl Real for f64 {
  fn default_rel_tol() -> Self {
    1e-8
  }
}

/// Converts a slice of `f64` into the target scalar.
pub fn cast_vec<T: Real>(xs: &[f64]) -> Vec<T> {
  xs.iter().map(|&v| T::lit(v)).collect()
}

/// Euclidean norm.
pub fn norm<T: Real>(v: &[T]) -> T {
  v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Euclidean distance.
pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
  a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}

/// Gamma function through `libm`, evaluated in double precision.
pub fn gamma<T: Real>(x: T) -> T {
  T::lit(libm::tgamma(x.f64()))
}

/// Surface area of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
  let h = d as f64 / 2.0;
  2.0 * std::f64::consts::PI.powf(h) / libm::tgamma(h)
}

/// Lévy density constant of the isotropic `alpha`-stable law with symbol
/// `|xi|^alpha` in `R^d`: `nu(dz) = C |z|^{-d-alpha} dz`.
pub fn stable_density_constant(alpha: f64, d: usize) -> f64 {
  let d = d as f64;
  alpha * 2f64.powf(alpha - 1.0) * libm::tgamma((d + alpha) / 2.0)
    / (std::f64::consts::PI.powf(d / 2.0) * libm::tgamma(1.0 - alpha / 2.0))
}

/// `int_0^inf (1 - cos w) w^{-1-alpha} dw` for `alpha` in `(0, 2)`.
pub fn one_minus_cos_moment(alpha: f64) -> f64 {
  if (alpha - 1.0).abs() < 1e-12 {
    std::f64::consts::FRAC_PI_2
  } else {
    -libm::tgamma(-alpha) * (std::f64::consts::FRAC_PI_2 * alpha).cos()
  }
}
