use lil_lab::lattice::*;
use lil_lab::rng::path_rng;
use lil_lab::stats::Estimate;
use proptest::prelude::*;

fn unit_field(d: usize, alpha: f64, l: i64, range: f64) -> ConductanceField {
  build_field(d, alpha, l, Some(range), WeightLaw::Constant { value: 1.0 }, 7).unwrap()
}

#[test]
fn nearest_neighbour_holding_times() {
  // d = 1, R_J = 1: two neighbours with unit conductance, nu = 2.
  let f = unit_field(1, 1.5, 400, 1.0);
  assert_eq!(f.nu(&[0]), 2.0);
  let horizon = 200.0;
  let mut v = Vec::new();
  let mut c = Vec::new();
  for i in 0..200 {
    v.push(simulate_walk(&f, WalkKind::Vsrw, &[0], horizon, &mut path_rng(1, i)).unwrap().jumps as f64);
    c.push(simulate_walk(&f, WalkKind::Csrw, &[0], horizon, &mut path_rng(2, i)).unwrap().jumps as f64);
  }
  let (ev, ec) = (Estimate::from_samples(&v), Estimate::from_samples(&c));
  assert!((ev.value - 2.0 * horizon).abs() < 4.0 * ev.se, "{ev:?}");
  assert!((ec.value - horizon).abs() < 4.0 * ec.se, "{ec:?}");
}

#[test]
fn jump_lengths_follow_the_kernel() {
  let alpha = 1.5;
  let f = unit_field(1, alpha, 256, 64.0);
  let total: f64 = (1..=64).map(|z| 2.0 * (z as f64).powf(-1.0 - alpha)).sum();
  assert!((f.nu(&[0]) - total).abs() < 1e-9 * total);
  let n = 200_000;
  let mut rng = path_rng(3, 0);
  let mut counts = [0usize; 4];
  for _ in 0..n {
    let y = f.sample_jump(&[0], &mut rng).unwrap();
    let z = y[0].unsigned_abs() as usize;
    assert!((1..=64).contains(&z));
    if z <= 3 {
      counts[z] += 1;
    }
  }
  for (z, &k) in counts.iter().enumerate().skip(1) {
    let p = 2.0 * (z as f64).powf(-1.0 - alpha) / total;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let emp = k as f64 / n as f64;
    assert!((emp - p).abs() < 4.0 * se, "|z| = {z}: {emp} vs {p}");
  }
}

#[test]
fn csrw_is_a_time_change_of_vsrw_for_constant_weights() {
  let f = unit_field(2, 1.5, 64, 8.0);
  let nu = f.nu(&[0, 0]);
  for i in 0..20 {
    let (tv, pv, cv) = walk_exit(&f, WalkKind::Vsrw, &[0, 0], 10.0, 1e9, &mut path_rng(5, i));
    let (tc, pc, cc) = walk_exit(&f, WalkKind::Csrw, &[0, 0], 10.0, 1e9, &mut path_rng(5, i));
    assert_eq!(pv, pc);
    assert_eq!(cv, cc);
    assert!((tc - nu * tv).abs() < 1e-9 * tc);
  }
}

#[test]
fn detailed_balance_holds_for_random_weights() {
  let f = build_field(2, 1.2, 12, Some(3.0), WeightLaw::Bernoulli { keep: 0.7, value: 2.0 }, 9).unwrap();
  for kind in [WalkKind::Vsrw, WalkKind::Csrw] {
    assert!(f.detailed_balance_defect(kind).unwrap() < 1e-12);
  }
}

#[test]
fn pareto_moments_match_the_declared_law() {
  let law = WeightLaw::BernoulliPareto { keep: 0.8, index: 3.0 };
  let f = build_field(2, 1.5, 64, None, law, 11).unwrap();
  let m = &f.moments;
  assert!((m.declared_p - 0.8 * 1.5).abs() < 1e-12);
  assert!((m.empirical_p / m.declared_p - 1.0).abs() < 0.05, "{m:?}");
  assert!((m.empirical_neg_q / m.declared_neg_q - 1.0).abs() < 0.05, "{m:?}");
  assert!((m.zero_fraction - 0.2).abs() < 0.01);
}

#[test]
fn range_beyond_a_quarter_box_is_rejected() {
  assert!(build_field(2, 1.5, 64, Some(17.0), WeightLaw::Constant { value: 1.0 }, 1).is_err());
  assert!(build_field(2, 1.5, 64, Some(16.0), WeightLaw::Constant { value: 1.0 }, 1).is_ok());
  assert!(build_field(1, 1.5, 16, None, WeightLaw::BernoulliPareto { keep: 0.5, index: 0.5 }, 1).is_err());
}

#[test]
fn environment_file_round_trips() {
  let f = build_field(2, 1.3, 32, Some(5.0), WeightLaw::Bernoulli { keep: 0.5, value: 3.0 }, 42).unwrap();
  let mut buf = Vec::new();
  write_env(&mut buf, &f).unwrap();
  let g = read_env(buf.as_slice()).unwrap();
  assert_eq!(
    (g.d, g.alpha, g.half_width, g.range, g.law, g.seed),
    (f.d, f.alpha, f.half_width, f.range, f.law, f.seed)
  );
  for x in [[0, 0], [3, -7], [-32, 32]] {
    assert_eq!(f.nu(&x), g.nu(&x));
    for z in f.offsets() {
      let y = [x[0] + z[0], x[1] + z[1]];
      assert_eq!(f.conductance(&x, &y), g.conductance(&x, &y));
    }
  }
  assert!(read_env(&b"LILENV02"[..]).is_err());
}

#[test]
fn graph_distance_counts_long_range_hops() {
  let f = unit_field(2, 1.5, 8, 2.0);
  assert_eq!(f.graph_distance(&[0, 0], &[0, 0]).unwrap(), Some(0));
  assert_eq!(f.graph_distance(&[0, 0], &[2, 0]).unwrap(), Some(1));
  assert_eq!(f.graph_distance(&[0, 0], &[3, 3]).unwrap(), Some(3));
}

proptest! {
  #![proptest_config(ProptestConfig::with_cases(64))]

  #[test]
  fn weights_are_symmetric(x in proptest::collection::vec(-20i64..20, 2), z in proptest::collection::vec(-4i64..4, 2)) {
    let f = build_field(2, 1.5, 20, Some(5.0), WeightLaw::BernoulliPareto { keep: 0.6, index: 2.5 }, 3).unwrap();
    let y: Vec<i64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
    prop_assert_eq!(f.weight(&x, &y), f.weight(&y, &x));
    prop_assert_eq!(f.conductance(&x, &y), f.conductance(&y, &x));
  }

  #[test]
  fn walks_stay_deterministic_per_stream(i in 0u64..1000) {
    let f = unit_field(2, 1.5, 32, 4.0);
    let a = simulate_walk(&f, WalkKind::Vsrw, &[0, 0], 5.0, &mut path_rng(8, i)).unwrap();
    let b = simulate_walk(&f, WalkKind::Vsrw, &[0, 0], 5.0, &mut path_rng(8, i)).unwrap();
    prop_assert_eq!(a, b);
  }
}
