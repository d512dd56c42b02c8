//! Exact random variates: stable laws, one-sided stable laws, tiny-shape
//! gamma variables, and signed log-domain arithmetic.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

/// Symmetric stable variate with characteristic function `exp(-|xi|^alpha)`
/// (Chambers–Mallows–Stuck).
pub fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
  if alpha == 2.0 {
    let z: f64 = StandardNormal.sample(rng);
    return std::f64::consts::SQRT_2 * z;
  }
  let v = PI * (rng.random::<f64>() - 0.5);
  if alpha == 1.0 {
    return v.tan();
  }
  let w: f64 = Exp1.sample(rng);
  (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// `(ln U, ln sin(alpha U), ...)` pieces of Kanter's representation.
fn kanter_ln<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
  // U uniform on (0, pi), never an endpoint.
  let u = PI * (1.0 - rng.random::<f64>());
  let u = u.min(PI * (1.0 - f64::EPSILON));
  let e: f64 = Exp1.sample(rng);
  (alpha * u).sin().ln() - u.sin().ln() / alpha + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - e.ln())
}

/// One-sided stable variate with Laplace transform `exp(-lambda^alpha)`,
/// `alpha` in `(0, 1]` (Kanter).
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
  if alpha == 1.0 {
    return 1.0;
  }
  kanter_ln(alpha, rng).exp()
}

/// `ln` of [`positive_stable`].
pub fn ln_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
  if alpha == 1.0 {
    return 0.0;
  }
  kanter_ln(alpha, rng)
}

/// `ln G` with `G ~ Gamma(shape, 1)`, valid for shapes far below
/// `f64::MIN_POSITIVE`-scale outputs: `G = Y U^{1/a}`, `Y ~ Gamma(1 + a)`.
pub fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
  if shape >= 1.0 {
    let g: f64 = Gamma::new(shape, 1.0).expect("shape > 0").sample(rng);
    return g.ln();
  }
  let y: f64 = Gamma::new(1.0 + shape, 1.0).expect("shape > 0").sample(rng);
  let u = 1.0 - rng.random::<f64>();
  y.ln() + u.ln() / shape
}

/// Uniform direction on the unit sphere of `R^d`.
pub fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
  if d == 1 {
    return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
  }
  loop {
    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let n = crate::num::norm(&v);
    if n > 1e-300 {
      return v.into_iter().map(|x| x / n).collect();
    }
  }
}

/// Poisson count; `rand_distr` requires a positive rate.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
  if mean <= 0.0 {
    return 0;
  }
  let p = rand_distr::Poisson::new(mean).expect("positive finite mean");
  p.sample(rng) as u64
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
  StandardNormal.sample(rng)
}

/// `ln(e^a + e^b)`.
pub fn ln_add(a: f64, b: f64) -> f64 {
  let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
  if lo == f64::NEG_INFINITY {
    return hi;
  }
  hi + (lo - hi).exp().ln_1p()
}

/// A real number stored as sign and `ln |x|`; zero has `ln = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLn {
  pub negative: bool,
  pub ln: f64,
}

impl SignedLn {
  pub const ZERO: Self = Self { negative: false, ln: f64::NEG_INFINITY };

  pub fn from_f64(x: f64) -> Self {
    Self { negative: x < 0.0, ln: x.abs().ln() }
  }

  pub fn to_f64(self) -> f64 {
    let m = self.ln.exp();
    if self.negative {
      -m
    } else {
      m
    }
  }

  pub fn sum(self, other: Self) -> Self {
    if self.ln == f64::NEG_INFINITY {
      return other;
    }
    if other.ln == f64::NEG_INFINITY {
      return self;
    }
    if self.negative == other.negative {
      return Self { negative: self.negative, ln: ln_add(self.ln, other.ln) };
    }
    let (big, small) = if self.ln >= other.ln { (self, other) } else { (other, self) };
    let d = small.ln - big.ln;
    if d == 0.0 {
      return Self::ZERO;
    }
    Self { negative: big.negative, ln: big.ln + (-d.exp_m1()).ln() }
  }
}

/// Symmetric stable variate in the signed log domain.
pub fn ln_symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> SignedLn {
  SignedLn::from_f64(symmetric_stable(alpha, rng))
}

/// Isotropic stable vector with symbol `|xi|^alpha` from the LePage series
/// `sum_k Gamma_k^{-1/alpha} U_k`: `terms` points, then a Gaussian stand-in
/// for the remaining small jumps.
pub fn lepage_isotropic<R: Rng + ?Sized>(alpha: f64, d: usize, terms: usize, rng: &mut R) -> Vec<f64> {
  let mut out = vec![0.0; d];
  let mut gamma = 0.0;
  for _ in 0..terms {
    let e: f64 = Exp1.sample(rng);
    gamma += e;
    let r = gamma.powf(-1.0 / alpha);
    for (o, u) in out.iter_mut().zip(unit_vector(d, rng)) {
      *o += r * u;
    }
  }
  let eps = gamma.powf(-1.0 / alpha);
  let df = d as f64;
  let sd = (alpha * eps.powf(2.0 - alpha) / ((2.0 - alpha) * df)).sqrt();
  for o in out.iter_mut() {
    *o += sd * normal(rng);
  }
  // E|<U, e>|^alpha for U uniform on the sphere.
  let g = |x: f64| libm::tgamma(x);
  let m = g(df / 2.0) * g((alpha + 1.0) / 2.0) / (PI.sqrt() * g((df + alpha) / 2.0));
  let c = (alpha * crate::num::one_minus_cos_moment(alpha) * m).powf(-1.0 / alpha);
  out.iter_mut().for_each(|o| *o *= c);
  out
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::rng::path_rng;

  #[test]
  fn signed_log_sums() {
    let cases = [(1.5, 2.25), (-3.0, 1.0), (2.0, -2.0), (0.0, -4.0), (1e-300, 1e-300)];
    for (a, b) in cases {
      let s = SignedLn::from_f64(a).sum(SignedLn::from_f64(b)).to_f64();
      assert!((s - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()), "{a}+{b}={s}");
    }
  }

  #[test]
  fn tiny_shape_gamma_stays_finite() {
    let mut rng = path_rng(1, 0);
    for _ in 0..100 {
      let g = ln_gamma_variate(1e-8, &mut rng);
      assert!(g.is_finite() && g < 0.0);
    }
  }

  #[test]
  fn gamma_mean_for_moderate_shape() {
    let mut rng = path_rng(2, 0);
    let n = 20_000;
    let m: f64 = (0..n).map(|_| ln_gamma_variate(0.5, &mut rng).exp()).sum::<f64>() / n as f64;
    assert!((m - 0.5).abs() < 0.03, "mean {m}");
  }
}
