use lil_lab::exitlab::*;
use lil_lab::lattice::{build_field, WalkKind, WeightLaw};
use lil_lab::samplers::{ProcessSpec, StableNorm, StepRule};
use lil_lab::stats::{ks_two_sample, Estimate};
use lil_lab::symbols::SymbolSpec;
use lil_lab::Error;
use proptest::prelude::*;

fn stable(alpha: f64) -> ProcessSpec {
  ProcessSpec::OneDStable { alpha, norm: StableNorm::Symbol }
}

fn bm() -> ProcessSpec {
  ProcessSpec::BrownianMotion { d: 1, variance: 2.0 }
}

fn opts() -> ExitOptions {
  ExitOptions { workers: 2, ..Default::default() }
}

fn sample(tau: f64, censored: bool) -> ExitSample {
  ExitSample { r: 1.0, x: vec![0.0], tau, exit_point: vec![1.0], censored }
}

#[test]
fn brownian_mean_exit_time_is_a_half() {
  let o = ExitOptions { dt: Some(1e-5), ..opts() };
  let s = estimate_exit(&ExitTarget::Process(&bm()), &[0.0], 1.0, 2000, 1, &o).unwrap();
  assert_eq!(s.n_censored, 0);
  assert!((s.mean_tau.value - 0.5).abs() < 4.0 * s.mean_tau.se + 0.01, "{:?}", s.mean_tau);
}

#[test]
fn pure_drift_exits_exactly() {
  let spec = ProcessSpec::StableLike {
    symbol: SymbolSpec::PureLevy { d: 1, density: None, axis: false, gaussian: vec![], drift: vec![2.0] },
    step: StepRule::default(),
  };
  let xs = sample_exits(&ExitTarget::Process(&spec), &[0.0], 1.0, 16, 0.125, 10.0, 3, 1).unwrap();
  for s in xs {
    assert!(!s.censored);
    assert_eq!(s.tau, 0.5);
    assert!((s.exit_point[0] - 1.0).abs() < 1e-12);
  }
}

#[test]
fn stable_exit_times_are_self_similar() {
  let spec = stable(1.5);
  let target = ExitTarget::Process(&spec);
  let a = estimate_exit(&target, &[0.0], 1.0, 4000, 10, &opts()).unwrap();
  let b = estimate_exit(&target, &[0.0], 2.0, 4000, 11, &opts()).unwrap();
  let k = 2f64.powf(1.5);
  let q = b.mean_tau.value / a.mean_tau.value;
  let se = q * ((a.mean_tau.se / a.mean_tau.value).powi(2) + (b.mean_tau.se / b.mean_tau.value).powi(2)).sqrt();
  assert!((q - k).abs() < 4.0 * se, "ratio {q} vs {k}");

  let exact = stable_exit_mean_1d(1.5, 1.0, 0.0);
  assert!((a.mean_tau.value - exact).abs() < 4.0 * a.mean_tau.se + 0.01 * exact);

  let dt = 1e-3 * spec.phi(&[0.0], 1.0).unwrap();
  let ta: Vec<f64> = sample_exits(&target, &[0.0], 1.0, 3000, dt, 1e3, 12, 2).unwrap().iter().map(|s| s.tau).collect();
  let tb: Vec<f64> =
    sample_exits(&target, &[0.0], 2.0, 3000, dt * k, 1e3, 13, 2).unwrap().iter().map(|s| s.tau / k).collect();
  assert!(ks_two_sample(&ta, &tb).p_value > 0.01);

  // Both sides of the jump-tail bound.
  for s in [&a, &b] {
    let prod = spec.jump_tail(&[0.0], s.r).unwrap() * s.mean_tau.value;
    assert!(prod > 0.1 && prod <= 1.2, "r = {}: {prod}", s.r);
  }
}

#[test]
fn brownian_tail_decays_at_the_eigenvalue_rate() {
  let o = ExitOptions { dt: Some(1e-4), ..opts() };
  let s = estimate_exit(&ExitTarget::Process(&bm()), &[0.0], 1.0, 20_000, 4, &o).unwrap();
  let fit = fit_tail(&s, 6).unwrap();
  assert!(fit.passed && fit.r2 >= 0.98, "{fit:?}");
  // P(tau > t) ~ exp(-pi^2 t / 4) with E tau = 1/2.
  let exact = -std::f64::consts::PI.powi(2) / 8.0;
  assert!((fit.slope / exact - 1.0).abs() < 0.2, "{} vs {exact}", fit.slope);
  assert!(fit.c7 > 0.0);
}

#[test]
fn lattice_exits_are_uncensored_in_a_large_box() {
  let f = build_field(2, 1.5, 128, Some(32.0), WeightLaw::Constant { value: 1.0 }, 2).unwrap();
  let t = ExitTarget::Lattice { field: &f, kind: WalkKind::Vsrw };
  let s = estimate_exit(&t, &[0.0, 0.0], 8.0, 2000, 5, &opts()).unwrap();
  assert_eq!(s.n_censored, 0);
  assert!(s.dt.is_none());
  assert!(s.mean_tau.value > 0.0 && s.tail[0].p > 0.0);
}

#[test]
fn short_horizon_is_excess_censoring() {
  let o = ExitOptions { dt: Some(1e-3), horizon: Some(0.01), ..opts() };
  let e = estimate_exit(&ExitTarget::Process(&bm()), &[0.0], 1.0, 1000, 6, &o).unwrap_err();
  assert!(matches!(e, Error::ExcessCensoring { .. }));
}

#[test]
fn no_exits_below_the_grid() {
  let e = check_ep(&bm(), &[0.0], 1.0, &[1e-6, 2e-6], 200, 7, 1).unwrap_err();
  assert!(matches!(e, Error::InsufficientEvents(_)));
}

#[test]
fn brownian_envelope_is_not_a_power_law() {
  let rep = check_ep(&bm(), &[0.0], 1.0, &[0.02, 0.04, 0.08, 0.16], 4000, 8, 2).unwrap();
  assert!(rep.no_power_law && !rep.linear);
}

#[test]
fn brownian_pruitt_constant_is_a_half() {
  let o = ExitOptions { step_fraction: 1e-4, ..opts() };
  let rep = check_pruitt(&bm(), &[0.0], &[0.5, 1.0, 2.0], 2000, 9, &o).unwrap();
  assert!(rep.passed);
  for row in &rep.rows {
    assert!((row.c16 - 0.5).abs() < 0.05, "{row:?}");
  }
}

#[test]
fn ndl_density_is_positive_for_brownian_motion() {
  let rep = check_ndl(&bm(), &[0.0], 1.0, 0.5, 4000, 10, 2).unwrap();
  assert!(rep.passed && rep.min_density_lo > 0.0, "{rep:?}");
}

#[test]
fn ndl_without_survivors_is_an_error() {
  let e = check_ndl(&bm(), &[0.0], 1.0, 0.99, 300, 11, 2).unwrap_err();
  assert!(matches!(e, Error::InsufficientSurvivors(_)));
}

#[test]
fn region_geometry_is_enforced() {
  let u = Region { lo: vec![-1.0], hi: vec![1.0], c0: None, r0: None };
  let e = check_exit_conditions(&stable(1.5), Some(&u), &[0.6], &[vec![0.0]], 1000, 1, &opts()).unwrap_err();
  assert!(matches!(e, Error::InvalidArgument(_)));
}

proptest! {
  #![proptest_config(ProptestConfig::with_cases(64))]

  #[test]
  fn tables_are_exactly_monotone(taus in proptest::collection::vec(1e-3f64..50.0, 60..400)) {
    let xs: Vec<ExitSample> = taus.iter().map(|&t| sample(t, false)).collect();
    let s = ExitStats::from_samples(&xs, None).unwrap();
    for w in s.tail.windows(2) {
      prop_assert!(w[1].p <= w[0].p && w[1].lo <= w[0].lo && w[1].hi <= w[0].hi);
    }
    for w in s.survival.windows(2) {
      prop_assert!(w[1].p >= w[0].p && w[1].lo >= w[0].lo && w[1].hi >= w[0].hi);
    }
    for r in s.tail.iter().chain(&s.survival) {
      prop_assert!(r.lo <= r.p && r.p <= r.hi);
    }
  }

  #[test]
  fn tail_fits_are_scale_free(taus in proptest::collection::vec(1e-3f64..10.0, 400), c in 0.01f64..100.0) {
    let a: Vec<ExitSample> = taus.iter().map(|&t| sample(t, false)).collect();
    let b: Vec<ExitSample> = taus.iter().map(|&t| sample(c * t, false)).collect();
    let (sa, sb) = (ExitStats::from_samples(&a, None).unwrap(), ExitStats::from_samples(&b, None).unwrap());
    prop_assert_eq!(sa.tail.len(), sb.tail.len());
    for (x, y) in sa.tail.iter().zip(&sb.tail) {
      prop_assert_eq!(x.count, y.count);
    }
    if let (Ok(fa), Ok(fb)) = (fit_tail(&sa, 6), fit_tail(&sb, 6)) {
      prop_assert!((fa.c5 - fb.c5).abs() < 1e-9 && (fa.c7 - fb.c7).abs() < 1e-9);
      prop_assert_eq!(fa.passed, fb.passed);
    }
  }

  #[test]
  fn censored_samples_never_enter_the_mean(taus in proptest::collection::vec(0.1f64..5.0, 10..100), k in 1usize..5) {
    let mut xs: Vec<ExitSample> = taus.iter().map(|&t| sample(t, false)).collect();
    xs.extend((0..k).map(|_| sample(1e6, true)));
    let s = ExitStats::from_samples(&xs, None).unwrap();
    prop_assert_eq!(s.n_censored, k);
    let e = Estimate::from_samples(&taus);
    prop_assert!((s.mean_tau.value - e.value).abs() < 1e-9);
  }
}
