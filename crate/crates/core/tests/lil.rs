use lil_lab::lil::*;
use lil_lab::samplers::{PathRecord, ProcessSpec, StableNorm};
use lil_lab::scale::{PowerScale, ScaleFunction, TabulatedScale};
use lil_lab::Error;
use proptest::prelude::*;

/// Path observed at `times` (increasing) with running supremum `m(t)`.
fn path_with_sup<F: Fn(f64) -> f64>(times: &[f64], m: F) -> PathRecord {
  let mut p = PathRecord::new(vec![0.0]);
  for &t in times {
    let v = m(t);
    p.push(t, vec![v], v.ln());
  }
  p
}

fn ascending(grid: &[f64]) -> Vec<f64> {
  let mut g = grid.to_vec();
  g.sort_by(f64::total_cmp);
  g
}

fn lll(t: f64) -> f64 {
  t.ln().abs().ln()
}

#[test]
fn identity_path_has_unit_ratio_at_zero() {
  let phi = PowerScale { c: 1.0, beta: 1.5 };
  let grid = ratio_grid(Direction::AtZero, 1e-8, 1.0, 0.8).unwrap();
  let path = path_with_sup(&ascending(&grid), |t| (t / lll(t)).powf(1.0 / 1.5));
  let c = ratio_at_zero(&path, &phi, &grid, 0).unwrap();
  assert!(c.ratios.iter().all(|r| (r - 1.0).abs() < 1e-12));
  assert!(c.windowed_minima.iter().all(|w| (w.min - 1.0).abs() < 1e-12));
}

#[test]
fn identity_path_has_unit_ratio_at_infinity() {
  let phi = PowerScale { c: 1.0, beta: 2.0 };
  let grid = ratio_grid(Direction::AtInfinity, 1.0, 1e8, 1.25).unwrap();
  let path = path_with_sup(&grid, |t| (t / lll(t)).sqrt());
  let c = ratio_at_infinity(&path, &phi, &grid, 0).unwrap();
  assert!(c.ratios.iter().all(|r| (r - 1.0).abs() < 1e-12));
}

#[test]
fn space_time_rescaling_at_infinity() {
  let beta = 1.5;
  let k = 100.0;
  let phi = PowerScale { c: 1.0, beta };
  let grid = ratio_grid(Direction::AtInfinity, 1.0, 1e6, 1.25).unwrap();
  let scaled: Vec<f64> = grid.iter().map(|t| k * t).collect();
  // X'(s) = k^{1/beta} X(s / k) for the identity path X.
  let path = path_with_sup(&scaled, |s| k.powf(1.0 / beta) * (s / k / lll(s / k)).powf(1.0 / beta));
  let c = ratio_at_infinity(&path, &phi, &scaled, 0).unwrap();
  for (t, r) in grid.iter().zip(&c.ratios) {
    let bound = (lll(k * t) / lll(*t)).powf(1.0 / beta);
    assert!((r - bound).abs() < 1e-9 * bound);
    assert!(*r >= 1.0);
  }
}

#[test]
fn grid_points_must_respect_the_cutoffs() {
  let phi = PowerScale { c: 1.0, beta: 1.5 };
  let path = path_with_sup(&[1e-9, 0.5], |t| t);
  assert!(matches!(ratio_at_zero(&path, &phi, &[0.5], 0), Err(Error::OutOfRange { .. })));
  assert!(matches!(ratio_at_infinity(&path, &phi, &[10.0], 0), Err(Error::OutOfRange { .. })));
  assert!(ratio_grid(Direction::AtZero, 1e-8, 1.0, 1.25).is_err());
}

#[test]
fn supremum_beyond_the_table_is_out_of_domain() {
  let phi = TabulatedScale::from_fn(|r: f64| r.powf(1.5), 1e-6, 1.0, 16).unwrap();
  let path = path_with_sup(&[1e-9, 1e-3], |_| 10.0);
  let e = ratio_at_zero(&path, &phi, &[1e-3], 0).unwrap_err();
  assert!(matches!(e, Error::OutOfDomain { .. }), "{e:?}");
}

#[test]
fn feller_normalization_reduces_to_the_classical_forms() {
  let t = (-std::f64::consts::E.powi(2)).exp();
  let v = feller_normalization(2.0, 0.0, t).unwrap();
  assert!((v - (t / lll(t)).sqrt()).abs() < 1e-12 * v);
  for alpha in [0.5, 1.2, 1.9] {
    let t = 1e-7;
    let v = feller_normalization(alpha, 0.0, t).unwrap();
    let inv = PowerScale { c: 1.0, beta: alpha }.ln_inverse((t / lll(t)).ln()).unwrap().exp();
    assert!((v - inv).abs() < 1e-12 * v);
  }
}

#[test]
fn feller_normalization_matches_the_inverse_scale() {
  let (alpha, gamma) = (1.5f64, 0.5f64);
  let phi = |r: f64| r.powf(alpha) * (1.0 + 1.0 / r).ln().powf(-gamma);
  let t = (-10.0f64).exp();
  let target = t / lll(t);
  let (mut lo, mut hi) = (1e-12f64, 1.0f64);
  for _ in 0..200 {
    let mid = (lo * hi).sqrt();
    if phi(mid) < target {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  let q = feller_normalization(alpha, gamma, t).unwrap() / lo;
  // Leading-order constant of the inverse is alpha^{gamma / alpha}.
  assert!((q / alpha.powf(gamma / alpha) - 1.0).abs() < 0.02, "{q}");
  assert!((q / alpha.powf(gamma) - 1.0).abs() < 0.25, "{q}");
}

#[test]
fn identical_curves_aggregate_to_unit_stability() {
  let phi = PowerScale { c: 1.0, beta: 1.5 };
  let grid = ratio_grid(Direction::AtZero, 1e-8, 1e-3, 0.8).unwrap();
  let path = path_with_sup(&ascending(&grid), |t| t.powf(0.6));
  let curves: Vec<RatioCurve> = (0..20).map(|i| ratio_at_zero(&path, &phi, &grid, i).unwrap()).collect();
  let groups = vec![(0..10).collect(), (10..20).collect()];
  let e = aggregate(&curves, &groups, LAST_DECADES).unwrap();
  assert_eq!(e.stability_ratio, 1.0);
  assert!(e.q10 == e.q50 && e.q50 == e.q90);
  assert_eq!(e.outliers, 0);
}

#[test]
fn a_frozen_path_is_an_outlier() {
  let phi = PowerScale { c: 1.0, beta: 1.5 };
  let grid = ratio_grid(Direction::AtZero, 1e-8, 1e-3, 0.8).unwrap();
  let moving = path_with_sup(&ascending(&grid), |t| t.powf(0.6));
  let mut frozen = PathRecord::new(vec![0.0]);
  frozen.push(1e-9, vec![0.0], f64::NEG_INFINITY);
  let mut curves: Vec<RatioCurve> = (0..9).map(|i| ratio_at_zero(&moving, &phi, &grid, i).unwrap()).collect();
  curves.push(ratio_at_zero(&frozen, &phi, &grid, 9).unwrap());
  let e = aggregate(&curves, &[], LAST_DECADES).unwrap();
  assert_eq!(e.q10, 0.0);
  assert_eq!(e.outliers, 1);
  assert!(e.q10 <= e.q50 && e.q50 <= e.q90);
}

#[test]
fn curves_on_different_grids_do_not_mix() {
  let phi = PowerScale { c: 1.0, beta: 1.5 };
  let a = ratio_grid(Direction::AtZero, 1e-8, 1e-3, 0.8).unwrap();
  let b = ratio_grid(Direction::AtZero, 1e-8, 1e-3, 0.7).unwrap();
  let path = path_with_sup(&ascending(&[a.clone(), b.clone()].concat()), |t| t.powf(0.6));
  let curves = vec![ratio_at_zero(&path, &phi, &a, 0).unwrap(), ratio_at_zero(&path, &phi, &b, 1).unwrap()];
  assert!(matches!(aggregate(&curves, &[], 3), Err(Error::MixedGrids)));
}

#[test]
fn simulated_curves_do_not_depend_on_workers() {
  let spec = ProcessSpec::OneDStable { alpha: 1.5, norm: StableNorm::Symbol };
  let phi = PowerScale { c: 1.0, beta: 1.5 };
  let grid = ratio_grid(Direction::AtZero, 1e-6, 1e-2, 0.8).unwrap();
  let m = Monitor::default();
  let a = simulate_curves(&spec, &[0.0], &phi, Direction::AtZero, &grid, 12, 5, &m, 1).unwrap();
  let b = simulate_curves(&spec, &[0.0], &phi, Direction::AtZero, &grid, 12, 5, &m, 3).unwrap();
  assert_eq!(a, b);
  assert!(a.iter().all(|c| c.ratios.iter().all(|&r| r > 0.0 && r.is_finite())));
}

proptest! {
  #![proptest_config(ProptestConfig::with_cases(64))]

  #[test]
  fn at_zero_ratios_scale_with_the_scale_function(
    incs in proptest::collection::vec(0.0f64..1.0, 60),
    c in 0.01f64..100.0,
  ) {
    let grid = ratio_grid(Direction::AtZero, 1e-8, 1e-3, 0.8).unwrap();
    let times = ascending(&grid);
    let mut m = 1e-9;
    let sups: Vec<f64> = incs.iter().cycle().take(times.len()).map(|d| { m += d * 1e-3; m }).collect();
    let mut p = PathRecord::new(vec![0.0]);
    for (t, s) in times.iter().zip(&sups) {
      p.push(*t, vec![*s], s.ln());
    }
    let a = ratio_at_zero(&p, &PowerScale { c: 1.0, beta: 1.5 }, &grid, 0).unwrap();
    let b = ratio_at_zero(&p, &PowerScale { c, beta: 1.5 }, &grid, 0).unwrap();
    for (x, y) in a.ratios.iter().zip(&b.ratios) {
      prop_assert!((y - c * x).abs() <= 1e-10 * c * x);
    }
  }

  #[test]
  fn windowed_minima_never_increase(incs in proptest::collection::vec(0.0f64..1.0, 60)) {
    let grid = ratio_grid(Direction::AtZero, 1e-8, 1e-3, 0.8).unwrap();
    let times = ascending(&grid);
    let mut m = 1e-9;
    let mut p = PathRecord::new(vec![0.0]);
    for (t, d) in times.iter().zip(incs.iter().cycle()) {
      m += d * 1e-4;
      p.push(*t, vec![m], m.ln());
    }
    let c = ratio_at_zero(&p, &PowerScale { c: 1.0, beta: 1.5 }, &grid, 0).unwrap();
    for w in c.window_min.windows(2) {
      prop_assert!(w[1] <= w[0]);
    }
    for w in c.windowed_minima.windows(2) {
      prop_assert!(w[1].min <= w[0].min);
    }
    for (w, d) in c.windowed_minima.iter().zip(&c.decade_minima) {
      prop_assert!(w.min <= d.min);
    }
    prop_assert!(c.ratios.iter().all(|&r| r >= 0.0));
  }
}
