//! Pre-registered acceptance checks. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::path::Path;
use std::time::Instant;

use lil_lab::io::csv_body;
use lil_lab::samplers::{sample_endpoints, ProcessSpec, SubordinatorSpec};
use lil_lab::stats::ks_two_sample;
use lil_lab::symbols::{box_grid, verify_phi_h_sandwich, Field, SymbolSpec};
use lil_lab_cli::{presets, run_config, ExperimentConfig};
use serde_json::Value;

const STABLE: &str = r#"
[process]
kind = "one_d_stable"
alpha = 1.5
norm = "symbol"
"#;

fn config(head: &str, body: &str) -> ExperimentConfig {
  ExperimentConfig::parse(&format!("{head}\n{body}")).expect("acceptance config parses")
}

fn run(cfg: &ExperimentConfig, dir: &Path) -> Value {
  let o = run_config(cfg, Some(dir)).expect("run succeeds");
  o.summary
}

fn f(v: &Value) -> f64 {
  v.as_f64().expect("number")
}

struct Line {
  name: &'static str,
  passed: bool,
  detail: String,
}

fn exit_slope(dir: &Path) -> Line {
  let cfg = config(
    "name = \"exit_slope\"\ntask = \"exit_stats\"\nseed = 101\npaths = 20000",
    &format!("{STABLE}\n[grids]\nr = [0.5, 1.0, 2.0, 4.0]"),
  );
  let s = run(&cfg, dir);
  let slope = f(&s["slopes"][0]["slope"]);
  Line {
    name: "exit-scaling slope 1.5 +- 0.1",
    passed: (slope - 1.5).abs() <= 0.1,
    detail: format!("slope {slope:.4}"),
  }
}

fn tail_fit(dir: &Path) -> Line {
  let cfg =
    config("name = \"a4\"\ntask = \"exit_stats\"\nseed = 102\npaths = 20000", &format!("{STABLE}\n[grids]\nr = [1.0]"));
  let s = run(&cfg, dir);
  let fit = &s["tail_fits"][0]["fit"];
  let (r2, slope, hi) = (f(&fit["r2"]), f(&fit["slope"]), f(&fit["slope_ci"][1]));
  Line {
    name: "A4 tail log-linear, R2 >= 0.98, slope CI < 0",
    passed: r2 >= 0.98 && slope < 0.0 && hi < 0.0,
    detail: format!("R2 {r2:.4}, slope {slope:.4}, CI upper {hi:.4}"),
  }
}

fn ep(dir: &Path) -> Line {
  let cfg = config("name = \"ep\"\ntask = \"check_EP\"\nseed = 103\npaths = 20000", STABLE);
  let s = run(&cfg, dir);
  let (theta, c) = (f(&s["theta"]), f(&s["c"]));
  Line {
    name: "EP linear regime, theta in [0.85, 1.15], c <= 5",
    passed: (0.85..=1.15).contains(&theta) && c <= 5.0,
    detail: format!("theta {theta:.4}, c {c:.4}"),
  }
}

fn radii(points: &[Vec<f64>]) -> Vec<f64> {
  points.iter().map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt()).collect()
}

fn subordination() -> Line {
  let n = 10_000;
  let sub = ProcessSpec::Subordinate {
    base: Box::new(ProcessSpec::BrownianMotion { d: 2, variance: 2.0 }),
    subordinator: SubordinatorSpec::Stable { alpha: 0.6 },
  };
  let direct = ProcessSpec::IsotropicStable { alpha: 1.2, d: 2 };
  let a = radii(&sample_endpoints(&sub, &[0.0, 0.0], 1.0, n, 104, 1).expect("subordinate sampler"));
  let b = radii(&sample_endpoints(&direct, &[0.0, 0.0], 1.0, n, 105, 1).expect("direct sampler"));
  let ks = ks_two_sample(&a, &b);
  Line {
    name: "subordination identity, KS p > 0.01",
    passed: ks.p_value > 0.01,
    detail: format!("D {:.4}, p {:.4}", ks.statistic, ks.p_value),
  }
}

fn meyer(dir: &Path) -> Line {
  let cfg = config(
    "name = \"meyer\"\ntask = \"meyer_equiv\"\nseed = 106\npaths = 10000",
    "[process]\nkind = \"one_d_stable\"\nalpha = 1.5\nnorm = \"density\"\n[meyer]\nrho = 1.0\ntime = 1.0",
  );
  let s = run_config(&cfg, Some(dir)).expect("run succeeds").summary;
  let (p, mean, expect, sigma) =
    (f(&s["ks_p_value"]), f(&s["mean_reattached"]["value"]), f(&s["expected_reattached"]), f(&s["sigma"]));
  Line {
    name: "Meyer equivalence, KS p > 0.01, count within 3 sigma",
    passed: p > 0.01 && (mean - expect).abs() <= 3.0 * sigma && (expect - 2.0 / 1.5).abs() < 1e-12,
    detail: format!("p {p:.4}, mean {mean:.4} vs {expect:.4} +- {:.4}", 3.0 * sigma),
  }
}

fn sandwich() -> Line {
  let symbol = SymbolSpec::VaryingOrder {
    d: 1,
    alpha: Field::Ramp { from: 1.2, to: 1.8, center: 0.0, width: 0.5 },
    gamma: Field::Ramp { from: 0.3, to: -0.3, center: 0.0, width: 0.5 },
  };
  let xs = box_grid(&[-1.0], &[1.0], 5);
  let rep = verify_phi_h_sandwich(&symbol, &xs, &[1e-3, 1e-2, 0.03, 0.1, 0.3], 100.0).expect("sandwich");
  Line {
    name: "Phi/h sandwich, 2 h Phi in [0.999, 100]",
    passed: rep.passed && rep.points.len() == 25 && rep.min_ratio >= 0.999 && rep.max_ratio <= 100.0,
    detail: format!("{} points, range [{:.4}, {:.4}]", rep.points.len(), rep.min_ratio, rep.max_ratio),
  }
}

fn chung(dir: &Path) -> Line {
  let cfg = config(
    "name = \"chung\"\ntask = \"lil_infinity\"\nseed = 107\npaths = 200",
    "[process]\nkind = \"brownian_motion\"\nd = 1\nvariance = 1.0\n\
     [lil]\nt_min = 100.0\nt_max = 1e6\nq = 1.25\ngroups = 1\nscale = { kind = \"power\", c = 1.0, beta = 2.0 }\n\
     monitor = { min_substeps = 64 }\n[checks]\nmedian_bracket = [0.7, 1.6]",
  );
  let s = run(&cfg, dir);
  let m = f(&s["centers"][0]["final_window_min_median"]);
  Line {
    name: "Chung bracket for BM at infinity, median in [0.7, 1.6]",
    passed: (0.7..=1.6).contains(&m),
    detail: format!("median {m:.4}"),
  }
}

fn geometric(dir: &Path) -> Line {
  let cfg = presets::preset("geom_stable_hunt").expect("preset");
  let s = run(&cfg, dir);
  let c = &s["centers"][0];
  let (lo, hi, spread) = (f(&c["minima_range"][0]), f(&c["minima_range"][1]), f(&c["decade_spread"]));
  Line {
    name: "geometric-stable minima in (0, 50], decade spread <= 3",
    passed: cfg.paths == 100 && lo > 0.0 && hi <= 50.0 && spread <= 3.0,
    detail: format!("minima [{lo:.4}, {hi:.4}], spread {spread:.4}"),
  }
}

fn varying_order(dir: &Path) -> Line {
  let cfg = config(
    "name = \"feller_exit\"\ntask = \"exit_stats\"\nseed = 108\npaths = 10000",
    "[process]\nkind = \"stable_like\"\n\
     [process.symbol]\nkind = \"varying_order\"\nd = 1\n\
     alpha = { kind = \"ramp\", from = 1.2, to = 1.8, center = 0.0, width = 1.0 }\n\
     gamma = { kind = \"constant\", value = 0.0 }\n\
     [grids]\nx = [[-5.0], [5.0]]\nr = [0.125, 0.25, 0.5, 1.0]\n\
     [checks]\nslope_targets = [1.2, 1.8]\nslope_tol = 0.15",
  );
  let s = run(&cfg, dir);
  let (a, b) = (f(&s["slopes"][0]["slope"]), f(&s["slopes"][1]["slope"]));
  Line {
    name: "varying-order local slopes within 0.15",
    passed: (a - 1.2).abs() <= 0.15 && (b - 1.8).abs() <= 0.15,
    detail: format!("slopes {a:.4} (1.2), {b:.4} (1.8)"),
  }
}

fn lattice(dir: &Path) -> Line {
  let cfg = presets::preset("rcm_vsrw").expect("preset");
  let s = run(&cfg, dir);
  let (slope, cens) = (f(&s["slopes"][0]["slope"]), f(&s["max_censoring"]));
  Line {
    name: "lattice RCM slope 1.5 +- 0.2, censoring < 1%",
    passed: cfg.paths == 5000 && (slope - 1.5).abs() <= 0.2 && cens < 0.01,
    detail: format!("slope {slope:.4}, censoring {cens:.4}"),
  }
}

fn concentration(dir: &Path) -> Line {
  let cfg = config(
    "name = \"stable_zero\"\ntask = \"lil_zero\"\nseed = 109\npaths = 100",
    &format!("{STABLE}\n[lil]\nt_min = 1e-8\nt_max = 0.065\nq = 0.8\ngroups = 2\nscale = {{ kind = \"power\", c = 1.0, beta = 1.5 }}"),
  );
  let s = run(&cfg, dir);
  let r = f(&s["centers"][0]["estimate"]["stability_ratio"]);
  Line { name: "cross-seed stability ratio < 2", passed: r < 2.0, detail: format!("ratio {r:.4}") }
}

fn csv_bodies(dir: &Path) -> Vec<(String, String)> {
  let mut out = Vec::new();
  let mut stack = vec![dir.to_path_buf()];
  while let Some(d) = stack.pop() {
    for e in std::fs::read_dir(&d).expect("output dir") {
      let p = e.expect("entry").path();
      if p.is_dir() {
        stack.push(p);
      } else if p.extension().is_some_and(|x| x == "csv") {
        let text = std::fs::read_to_string(&p).expect("csv");
        out.push((p.strip_prefix(dir).expect("prefix").display().to_string(), csv_body(&text)));
      }
    }
  }
  out.sort();
  out
}

fn determinism(dir: &Path) -> Line {
  let mut bad = Vec::new();
  let mut files = 0;
  for name in presets::names() {
    let mut cfg = presets::preset(name).expect("preset");
    cfg.paths = if name == "rcm_vsrw" { 200 } else { 12 };
    let mut bodies = Vec::new();
    for threads in ["1", "3"] {
      std::env::set_var("LIL_LAB_THREADS", threads);
      let out = dir.join(format!("{name}_{threads}"));
      run_config(&cfg, Some(&out)).expect("preset runs");
      bodies.push(csv_bodies(&out));
    }
    std::env::remove_var("LIL_LAB_THREADS");
    files += bodies[0].len();
    if bodies[0].is_empty() || bodies[0] != bodies[1] {
      bad.push(name);
    }
  }
  Line {
    name: "determinism across LIL_LAB_THREADS",
    passed: bad.is_empty(),
    detail: format!("{files} CSV files compared; mismatched presets {bad:?}"),
  }
}

fn main() {
  let tmp = tempfile::tempdir().expect("tempdir");
  let d = |s: &str| tmp.path().join(s);
  let checks: Vec<Box<dyn Fn() -> Line>> = vec![
    Box::new(|| exit_slope(&d("exit_slope"))),
    Box::new(|| tail_fit(&d("a4"))),
    Box::new(|| ep(&d("ep"))),
    Box::new(subordination),
    Box::new(|| meyer(&d("meyer"))),
    Box::new(sandwich),
    Box::new(|| chung(&d("chung"))),
    Box::new(|| geometric(&d("geom"))),
    Box::new(|| varying_order(&d("feller"))),
    Box::new(|| lattice(&d("rcm"))),
    Box::new(|| concentration(&d("stable_zero"))),
    Box::new(|| determinism(&d("determinism"))),
  ];
  let mut failed = 0;
  for check in &checks {
    let clock = Instant::now();
    let line = check();
    failed += usize::from(!line.passed);
    println!(
      "{} {} ({}; {:.1}s)",
      if line.passed { "PASS" } else { "FAIL" },
      line.name,
      line.detail,
      clock.elapsed().as_secs_f64()
    );
  }
  println!("acceptance: {} of {} criteria passed", checks.len() - failed, checks.len());
  if failed > 0 {
    std::process::exit(1);
  }
}
