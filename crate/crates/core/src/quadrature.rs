//! Adaptive Gauss–Kronrod quadrature and the oscillatory-tail summation used
//! for Lévy integrals.

use crate::error::{Error, Result};
use crate::num::Real;

const XGK: [f64; 8] = [
  0.991_455_371_120_812_6,
  0.949_107_912_342_758_5,
  0.864_864_423_359_769_1,
  0.741_531_185_599_394_4,
  0.586_087_235_467_691_1,
  0.405_845_151_377_397_2,
  0.207_784_955_007_898_5,
  0.0,
];
const WGK: [f64; 8] = [
  0.022_935_322_010_529_22,
  0.063_092_092_629_978_55,
  0.104_790_010_322_250_2,
  0.140_653_259_715_525_9,
  0.169_004_726_639_267_9,
  0.190_350_578_064_785_4,
  0.204_432_940_075_298_9,
  0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
  [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
  a: T,
  b: T,
  value: T,
  error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
  let half = T::lit(0.5);
  let center = half * (a + b);
  let half_len = half * (b - a);
  let fc = f(center);
  let mut kronrod = fc * T::lit(WGK[7]);
  let mut gauss = fc * T::lit(WG[3]);
  for j in 0..7 {
    let dx = half_len * T::lit(XGK[j]);
    let pair = f(center - dx) + f(center + dx);
    kronrod = kronrod + T::lit(WGK[j]) * pair;
    if j % 2 == 1 {
      gauss = gauss + T::lit(WG[j / 2]) * pair;
    }
  }
  Segment { a, b, value: kronrod * half_len, error: ((kronrod - gauss) * half_len).abs() }
}

/// Globally adaptive G7–K15 integrator.
#[derive(Debug, Clone, Copy)]
pub struct Integrator<T> {
  pub rel_tol: T,
  pub abs_tol: T,
  pub max_segments: usize,
}

impl<T: Real> Default for Integrator<T> {
  fn default() -> Self {
    Self { rel_tol: T::default_rel_tol(), abs_tol: T::min_positive_value().sqrt(), max_segments: 2000 }
  }
}

impl<T: Real> Integrator<T> {
  pub fn with_rel_tol(rel_tol: T) -> Self {
    Self { rel_tol, ..Self::default() }
  }

  /// `int_a^b f`.
  pub fn integrate<F: Fn(T) -> T>(&self, f: F, a: T, b: T) -> Result<T> {
    if a == b {
      return Ok(T::zero());
    }
    if b < a {
      return self.integrate(f, b, a).map(|v| -v);
    }
    let mut segments = vec![gk15(&f, a, b)];
    loop {
      let total: T = segments.iter().fold(T::zero(), |s, g| s + g.value);
      let err: T = segments.iter().fold(T::zero(), |s, g| s + g.error);
      if !total.is_finite() {
        return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
      }
      if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
        return Ok(total);
      }
      if segments.len() >= self.max_segments {
        return Err(Error::QuadratureFailure(format!(
          "error {err} after {} segments on [{a}, {b}], value {total}",
          segments.len()
        )));
      }
      let (worst, _) =
        segments.iter().enumerate().fold(
          (0, T::neg_infinity()),
          |(bi, be), (i, g)| {
            if g.error > be {
              (i, g.error)
            } else {
              (bi, be)
            }
          },
        );
      let seg = segments.swap_remove(worst);
      let mid = T::lit(0.5) * (seg.a + seg.b);
      if mid <= seg.a || mid >= seg.b {
        return Err(Error::QuadratureFailure(format!("interval collapsed near {mid}")));
      }
      segments.push(gk15(&f, seg.a, mid));
      segments.push(gk15(&f, mid, seg.b));
    }
  }

  /// `int_a^inf f` via `x = a + s / (1 - s)`.
  pub fn integrate_to_infinity<F: Fn(T) -> T>(&self, f: F, a: T) -> Result<T> {
    let one = T::one();
    self.integrate(
      |s: T| {
        let w = one - s;
        let w2 = w * w;
        if w2 == T::zero() {
          return T::zero();
        }
        f(a + s / w) / w2
      },
      T::zero(),
      one,
    )
  }

  /// `int_a^b f` for `0 < a < b` in the variable `u = ln x`; suited to
  /// integrands that vary over many decades.
  pub fn integrate_log<F: Fn(T) -> T>(&self, f: F, a: T, b: T) -> Result<T> {
    self.integrate(
      |u: T| {
        let x = u.exp();
        f(x) * x
      },
      a.ln(),
      b.ln(),
    )
  }

  /// `int_0^b f` for integrands with an integrable power singularity at 0.
  pub fn integrate_from_zero<F: Fn(T) -> T>(&self, f: F, b: T) -> Result<T> {
    let one = T::one();
    let lb = b.ln();
    self.integrate(
      |s: T| {
        let w = one - s;
        let x = (lb - s / w).exp();
        mapped(&f, x, w)
      },
      T::zero(),
      one,
    )
  }

  /// `int_0^inf f` split at `pivot`, both halves in logarithmic variables.
  pub fn integrate_positive_axis<F: Fn(T) -> T>(&self, f: F, pivot: T) -> Result<T> {
    let lower = self.integrate_from_zero(&f, pivot)?;
    let one = T::one();
    let lp = pivot.ln();
    let upper = self.integrate(
      |s: T| {
        let w = one - s;
        let x = (lp + s / w).exp();
        mapped(&f, x, w)
      },
      T::zero(),
      one,
    )?;
    Ok(lower + upper)
  }

  /// `int_start^inf f` for an oscillating integrand whose sign changes every
  /// `half_period`. Cell integrals are summed and the partial sums are
  /// accelerated by repeated averaging.
  pub fn oscillatory_tail<F: Fn(T) -> T>(&self, f: F, start: T, half_period: T) -> Result<T> {
    const MIN_TERMS: usize = 12;
    const MAX_TERMS: usize = 400;
    let mut partial = Vec::with_capacity(64);
    let mut sum = T::zero();
    let mut prev: Option<T> = None;
    let cell_integrator =
      Integrator { rel_tol: self.rel_tol * T::lit(0.1), abs_tol: self.abs_tol, max_segments: self.max_segments };
    for k in 0..MAX_TERMS {
      let a = start + half_period * T::from_usize(k).unwrap();
      let b = a + half_period;
      sum = sum + cell_integrator.integrate(&f, a, b)?;
      partial.push(sum);
      if partial.len() >= MIN_TERMS {
        let est = repeated_average(&partial[partial.len() - MIN_TERMS..]);
        if let Some(p) = prev {
          if (est - p).abs() <= self.abs_tol.max(self.rel_tol * est.abs()) {
            return Ok(est);
          }
        }
        prev = Some(est);
      }
    }
    Err(Error::QuadratureFailure(format!("oscillatory tail from {start} did not settle")))
  }
}

/// `f(x) x / w^2`. The endpoint images `x = 0` and `x = inf`, and overflow in
/// the extreme range, contribute 0.
#[inline]
fn mapped<T: Real, F: Fn(T) -> T>(f: &F, x: T, w: T) -> T {
  if x == T::zero() || !x.is_finite() || w == T::zero() {
    return T::zero();
  }
  let v = f(x) * x / (w * w);
  let tiny = T::min_positive_value().sqrt().sqrt();
  if !v.is_finite() && (x < tiny || x > T::one() / tiny) {
    return T::zero();
  }
  v
}

/// Euler-style acceleration: averages neighbouring partial sums until a
/// single value remains.
fn repeated_average<T: Real>(sums: &[T]) -> T {
  let mut row = sums.to_vec();
  let half = T::lit(0.5);
  while row.len() > 1 {
    row = row.windows(2).map(|w| half * (w[0] + w[1])).collect();
  }
  row[0]
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn polynomial_exact() {
    let q = Integrator::<f64>::default();
    let v = q.integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0).unwrap();
    assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
  }

  #[test]
  fn endpoint_singularity() {
    let q = Integrator::<f64>::default();
    let v = q.integrate_from_zero(|x| x.powf(-0.5), 1.0).unwrap();
    assert!((v - 2.0).abs() < 1e-8);
  }

  #[test]
  fn semi_infinite_power() {
    let q = Integrator::<f64>::default();
    let v = q.integrate_to_infinity(|x| x.powf(-2.5), 1.0).unwrap();
    assert!((v - 1.0 / 1.5).abs() < 1e-8);
  }

  #[test]
  fn dirichlet_integral_by_tail_summation() {
    // int_0^inf sin x / x = pi/2
    let q = Integrator::<f64>::with_rel_tol(1e-10);
    let head = q.integrate(|x: f64| if x == 0.0 { 1.0 } else { x.sin() / x }, 0.0, std::f64::consts::PI).unwrap();
    let tail = q.oscillatory_tail(|x: f64| x.sin() / x, std::f64::consts::PI, std::f64::consts::PI).unwrap();
    assert!((head + tail - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
  }

  #[test]
  fn single_precision_instantiation() {
    let q = Integrator::<f32>::default();
    let v = q.integrate(|x: f32| x.exp(), 0.0, 1.0).unwrap();
    assert!((v - (std::f32::consts::E - 1.0)).abs() < 1e-5);
  }
}
