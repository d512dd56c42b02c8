//! Sine integral and the Fourier kernels built from it.

use num_complex::Complex;

use crate::num::Real;

/// Returns `(Si(x), Ci(x))` for `x > 0`.
pub fn sici<T: Real>(x: T) -> (T, T) {
  let two = T::lit(2.0);
  if x <= two * two {
    // Power series; both converge quickly for x <= 4.
    let x2 = x * x;
    let mut si = T::zero();
    let mut term = x; // x^{2n+1}/(2n+1)!
    let mut n = 0usize;
    loop {
      let k = T::from_usize(2 * n + 1).unwrap();
      let add = term / k;
      si = if n.is_multiple_of(2) { si + add } else { si - add };
      if add.abs() < T::epsilon() * si.abs() {
        break;
      }
      term = term * x2 / (T::from_usize((2 * n + 2) * (2 * n + 3)).unwrap());
      n += 1;
    }
    let mut ci_sum = T::zero();
    let mut term = T::one(); // x^{2n}/(2n)!
    let mut n = 1usize;
    loop {
      term = term * x2 / T::from_usize((2 * n - 1) * (2 * n)).unwrap();
      let add = term / T::from_usize(2 * n).unwrap();
      ci_sum = if n % 2 == 1 { ci_sum - add } else { ci_sum + add };
      if add.abs() < T::epsilon() * ci_sum.abs().max(T::epsilon()) {
        break;
      }
      n += 1;
    }
    let euler = T::lit(0.577_215_664_901_532_9);
    return (si, euler + x.ln() + ci_sum);
  }
  // Lentz continued fraction for E1(ix).
  let one = Complex::new(T::one(), T::zero());
  let tiny = T::min_positive_value().sqrt();
  let mut b = Complex::new(T::one(), x);
  let mut c = Complex::new(T::one() / tiny, T::zero());
  let mut d = one / b;
  let mut h = d;
  for i in 2..10_000usize {
    let a = -T::from_usize((i - 1) * (i - 1)).unwrap();
    b = b + Complex::new(two, T::zero());
    d = one / (d * a + b);
    c = b + one / c * a;
    let del = c * d;
    h = h * del;
    if (del - one).norm() < T::epsilon() {
      break;
    }
  }
  let h = Complex::new(x.cos(), -x.sin()) * h;
  (T::FRAC_PI_2() + h.im, -h.re)
}

/// `pi/2 - Si(u)`, accurate for large `u`.
pub fn si_complement<T: Real>(u: T) -> T {
  if u <= T::zero() {
    return T::FRAC_PI_2();
  }
  T::FRAC_PI_2() - sici(u).0
}

/// `int_0^inf min(z^2, 1) sin(u z) / z dz`.
///
/// Fourier kernel that maps a symmetric symbol derivative onto the truncated
/// second moment of its Lévy measure.
pub fn truncated_moment_kernel<T: Real>(u: T) -> T {
  if u <= T::lit(1e-3) {
    // (sin u - u cos u)/u^2 = u/3 - u^3/30 + ...
    let u2 = u * u;
    return u / T::lit(3.0) - u2 * u / T::lit(30.0) + si_complement(u);
  }
  (u.sin() - u * u.cos()) / (u * u) + si_complement(u)
}

/// `int_0^1 z sin(u z) dz = (sin u - u cos u) / u^2`.
pub fn small_moment_kernel<T: Real>(u: T) -> T {
  if u <= T::lit(1e-3) {
    let u2 = u * u;
    return u / T::lit(3.0) - u2 * u / T::lit(30.0);
  }
  (u.sin() - u * u.cos()) / (u * u)
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn reference_values() {
    // Abramowitz & Stegun table 5.1
    let (si, ci) = sici(1.0_f64);
    assert!((si - 0.946_083_070_367_183).abs() < 1e-13);
    assert!((ci - 0.337_403_922_900_968).abs() < 1e-13);
    let (si, ci) = sici(10.0_f64);
    assert!((si - 1.658_347_594_218_874).abs() < 1e-12);
    assert!((ci + 0.045_456_433_004_455).abs() < 1e-12);
  }

  #[test]
  fn branches_agree_at_switch() {
    let (a, _) = sici(4.0_f64);
    let (b, _) = sici(4.0_f64 + 1e-12);
    assert!((a - b).abs() < 1e-10);
  }

  #[test]
  fn kernel_limits() {
    assert!((truncated_moment_kernel(0.0_f64) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    // Decays like 2 sin(u)/u^2.
    let u = 1000.5_f64;
    assert!((truncated_moment_kernel(u) - 2.0 * u.sin() / (u * u)).abs() < 1e-8);
  }
}
