//! Task execution, artifacts and the manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use lil_lab::exitlab::{
  check_ep, check_exit_conditions, check_ndl, check_pruitt, estimate_exit, exit_scaling_slope, fit_tail, ExitOptions,
  ExitStats, ExitTarget,
};
use lil_lab::io::{csv_document, write_atomic, Provenance};
use lil_lab::lattice::{build_field, simulate_walk, ConductanceField};
use lil_lab::lil::{aggregate, decade_medians, ratio_at_infinity, ratio_grid, simulate_curves, Direction, RatioCurve};
use lil_lab::parallel::{par_map, worker_count};
use lil_lab::rng::{derive_seed, json_hash, path_rng};
use lil_lab::samplers::{meyer_split, sample_endpoints, sample_meyer_paths, ProcessSpec, StepRule};
use lil_lab::scale::{
  check_scaling, log_grid, GeometricStableScale, LogCorrectedPowerScale, PowerScale, ScaleFunction,
};
use lil_lab::stats::{ks_two_sample, median, quantile_lower, Estimate};
use lil_lab::symbols::{box_grid, check_conditions_o, verify_phi_h_sandwich, OGrids};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ProcessConfig, ScaleConfig, Task};
use crate::error::CliError;

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct Outcome {
  pub passed: bool,
  pub out_dir: PathBuf,
  pub files: Vec<String>,
  pub summary: Value,
}

impl Outcome {
  pub fn exit_code(&self) -> i32 {
    if self.passed {
      0
    } else {
      1
    }
  }
}

struct Ctx<'a> {
  cfg: &'a ExperimentConfig,
  out: PathBuf,
  prov: Provenance,
  workers: usize,
  files: Vec<String>,
  seeds: BTreeMap<String, u64>,
}

impl Ctx<'_> {
  fn seed(&mut self, label: &str) -> u64 {
    let s = derive_seed(self.cfg.seed, label);
    self.seeds.insert(label.to_string(), s);
    s
  }

  fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(&self.out.join(name), bytes)?;
    self.files.push(name.to_string());
    Ok(())
  }

  fn csv(&mut self, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let doc = csv_document(Some(&self.prov), header, rows);
    self.write(name, doc.as_bytes())
  }

  fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
    let mut v = serde_json::to_value(value).expect("serializable");
    if let Value::Object(m) = &mut v {
      m.insert("provenance".into(), serde_json::to_value(&self.prov).expect("serializable"));
    }
    let text = serde_json::to_string_pretty(&v).expect("json") + "\n";
    self.write(name, text.as_bytes())
  }

  fn exit_options(&self) -> ExitOptions {
    let mut o = self.cfg.exit.clone();
    o.workers = self.workers;
    if self.cfg.grids.t.is_some() {
      o.t_grid = self.cfg.grids.t.clone();
    }
    o
  }
}

fn spec_of(cfg: &ExperimentConfig) -> Result<&ProcessSpec, CliError> {
  match &cfg.process {
    ProcessConfig::Spec(s) => Ok(s),
    ProcessConfig::Lattice(_) => Err(config_err("process", "this task needs a process, not a lattice")),
  }
}

fn config_err(field: &str, msg: &str) -> CliError {
  CliError::Config { field: Some(field.into()), line: None, msg: msg.into() }
}

fn spec_hash(cfg: &ExperimentConfig) -> String {
  match &cfg.process {
    ProcessConfig::Spec(s) => s.hash(),
    ProcessConfig::Lattice(l) => json_hash(l),
  }
}

fn build_lattice(cfg: &ExperimentConfig) -> Result<Option<ConductanceField>, CliError> {
  match &cfg.process {
    ProcessConfig::Lattice(l) => {
      Ok(Some(build_field(l.d, l.alpha, l.half_width, l.range, l.law, l.field_seed.unwrap_or(cfg.seed))?))
    }
    ProcessConfig::Spec(_) => Ok(None),
  }
}

fn field_summary(field: &ConductanceField) -> Value {
  json!({
    "range": field.range,
    "moments": field.moments,
    "truncated_tail_mass": field.truncated_tail_mass,
  })
}

/// Runs `cfg`, writing artifacts into `out` (or the configured directory)
/// and a `manifest.json`. Simulation failures are recorded in the manifest
/// before being returned.
pub fn run_config(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Outcome, CliError> {
  let out =
    out.map(Path::to_path_buf).or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
  let prov = Provenance { config_hash: json_hash(cfg), spec_hash: spec_hash(cfg), seed: cfg.seed };
  let mut ctx = Ctx { cfg, out, prov, workers: worker_count(cfg.workers), files: vec![], seeds: BTreeMap::new() };
  let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
  let clock = Instant::now();
  let result = match cfg.task {
    Task::ExitStats => exit_stats(&mut ctx),
    Task::CheckA | Task::CheckB => conditions(&mut ctx),
    Task::CheckEp => ep(&mut ctx),
    Task::CheckPruitt => pruitt(&mut ctx),
    Task::CheckO => conditions_o(&mut ctx),
    Task::CheckNdl => ndl(&mut ctx),
    Task::LilZero => lil(&mut ctx, Direction::AtZero),
    Task::LilInfinity => lil(&mut ctx, Direction::AtInfinity),
    Task::MeyerEquiv => meyer(&mut ctx),
    Task::ScaleTable => scale_table(&mut ctx),
  };
  let (status, summary, error) = match &result {
    Ok((passed, summary)) => (if *passed { "pass" } else { "check_fail" }, summary.clone(), None),
    Err(e) => ("error", Value::Null, Some(e.to_string())),
  };
  let manifest = json!({
    "name": cfg.name,
    "task": cfg.task,
    "status": status,
    "error": error,
    "config_hash": ctx.prov.config_hash,
    "spec_hash": ctx.prov.spec_hash,
    "seed": cfg.seed,
    "seeds": ctx.seeds,
    "workers": ctx.workers,
    "files": ctx.files,
    "timestamp": started,
    "wall_time_s": clock.elapsed().as_secs_f64(),
    "summary": summary,
  });
  write_atomic(
    &ctx.out.join("manifest.json"),
    (serde_json::to_string_pretty(&manifest).expect("json") + "\n").as_bytes(),
  )?;
  let (passed, summary) = result?;
  Ok(Outcome { passed, out_dir: ctx.out, files: ctx.files, summary })
}

type TaskResult = Result<(bool, Value), CliError>;

fn exit_stats(ctx: &mut Ctx) -> TaskResult {
  let cfg = ctx.cfg;
  let field = build_lattice(cfg)?;
  let target = match (&cfg.process, &field) {
    (ProcessConfig::Lattice(l), Some(f)) => ExitTarget::Lattice { field: f, kind: l.walk },
    (ProcessConfig::Spec(s), _) => ExitTarget::Process(s),
    _ => unreachable!("lattice configs carry a field"),
  };
  let opts = ctx.exit_options();
  let single = cfg.grids.x.len() == 1 && cfg.grids.r.len() == 1;
  let mut balls: Vec<ExitStats> = Vec::new();
  let mut scaling_rows = Vec::new();
  let mut slopes = Vec::new();
  let mut tails_ok = true;
  let mut fits = Vec::new();
  let mut slopes_ok = true;
  for (ix, x) in cfg.grids.x.iter().enumerate() {
    let mut here = Vec::new();
    for (ir, &r) in cfg.grids.r.iter().enumerate() {
      let seed = ctx.seed(&format!("exit_x{ix}_r{ir}"));
      let s = estimate_exit(&target, x, r, cfg.paths, seed, &opts)?;
      let (tail, surv) = if single {
        ("tail.csv".to_string(), "survival.csv".to_string())
      } else {
        (format!("tail_x{ix}_r{ir}.csv"), format!("survival_x{ix}_r{ir}.csv"))
      };
      ctx.write(&tail, s.tail_csv(Some(&ctx.prov)).as_bytes())?;
      ctx.write(&surv, s.survival_csv(Some(&ctx.prov)).as_bytes())?;
      scaling_rows.push(vec![ix as f64, r, s.mean_tau.value, s.mean_tau.lo, s.mean_tau.hi]);
      match fit_tail(&s, 6) {
        Ok(f) => {
          tails_ok &= f.passed;
          fits.push(json!({"x": ix, "r": r, "fit": f}));
        }
        Err(e) => {
          tails_ok = false;
          fits.push(json!({"x": ix, "r": r, "error": e.to_string()}));
        }
      }
      here.push(s);
    }
    if let Some(f) = exit_scaling_slope(&here) {
      if let Some(targets) = &cfg.checks.slope_targets {
        let tol = cfg.checks.slope_tol.unwrap_or(0.1);
        slopes_ok &= targets.get(ix).is_some_and(|t| (f.slope - t).abs() <= tol);
      }
      slopes.push(json!({"x": x, "slope": f.slope, "slope_ci": f.slope_ci(), "r2": f.r2}));
    } else if cfg.checks.slope_targets.is_some() {
      slopes_ok = false;
    }
    balls.extend(here);
  }
  if !single {
    ctx.csv("scaling.csv", "x_index,r,mean_tau,lo,hi", &scaling_rows)?;
  }
  let passed = slopes_ok && (!cfg.checks.tail_fit || tails_ok);
  let max_censoring = balls.iter().map(|b| b.censoring_rate).fold(0.0, f64::max);
  let summary = json!({
    "slopes": slopes,
    "tail_fits": fits,
    "mean_tau": balls.iter().map(|b| json!({"x": b.x, "r": b.r, "mean_tau": b.mean_tau})).collect::<Vec<_>>(),
    "max_censoring": max_censoring,
    "field": field.as_ref().map(field_summary),
  });
  ctx.json("exit_stats.json", &json!({"balls": balls, "summary": summary}))?;
  Ok((passed, summary))
}

fn conditions(ctx: &mut Ctx) -> TaskResult {
  let cfg = ctx.cfg;
  let spec = spec_of(cfg)?;
  let region = if cfg.task == Task::CheckA { cfg.region.as_ref() } else { None };
  let seed = ctx.seed("conditions");
  let rep = check_exit_conditions(spec, region, &cfg.grids.r, &cfg.grids.x, cfg.paths, seed, &ctx.exit_options())?;
  let rows: Vec<Vec<f64>> = rep.means.iter().map(|&(ix, r, m)| vec![ix as f64, r, m]).collect();
  ctx.csv("means.csv", "x_index,r,mean_tau", &rows)?;
  ctx.json("conditions.json", &rep)?;
  Ok((rep.passed, json!({"verdicts": rep.verdicts})))
}

fn ep(ctx: &mut Ctx) -> TaskResult {
  let cfg = ctx.cfg;
  let spec = spec_of(cfg)?;
  let (x, r) = (&cfg.grids.x[0], cfg.grids.r[0]);
  let phi = spec.phi(x, r)?;
  let grid = match &cfg.grids.t {
    Some(t) => t.clone(),
    None => log_grid(cfg.ep.window.0 * phi, cfg.ep.window.1 * phi, cfg.ep.per_decade),
  };
  let seed = ctx.seed("ep");
  let rep = check_ep(spec, x, r, &grid, cfg.paths, seed, ctx.workers)?;
  let rows: Vec<Vec<f64>> = rep.rows.iter().map(|w| vec![w.at, w.p, w.lo, w.hi]).collect();
  ctx.csv("ep.csv", "t,p,lo,hi", &rows)?;
  ctx.json("ep.json", &rep)?;
  let passed = match cfg.checks.ep_expect.as_deref().unwrap_or("linear") {
    "linear" => rep.linear && rep.c <= cfg.checks.ep_c_max.unwrap_or(5.0),
    "no_power_law" => rep.no_power_law,
    other => return Err(config_err("checks.ep_expect", &format!("unknown expectation `{other}`"))),
  };
  Ok((
    passed,
    json!({"theta": rep.theta, "c": rep.c, "r2": rep.r2, "linear": rep.linear, "no_power_law": rep.no_power_law}),
  ))
}

fn pruitt(ctx: &mut Ctx) -> TaskResult {
  let cfg = ctx.cfg;
  let spec = spec_of(cfg)?;
  let seed = ctx.seed("pruitt");
  let rep = check_pruitt(spec, &cfg.grids.x[0], &cfg.grids.r, cfg.paths, seed, &ctx.exit_options())?;
  let rows: Vec<Vec<f64>> = rep.rows.iter().map(|w| vec![w.r, w.phi, w.mean_tau, w.c16, w.c14]).collect();
  ctx.csv("pruitt.csv", "r,phi,mean_tau,c16,c14", &rows)?;
  ctx.json("pruitt.json", &rep)?;
  Ok((rep.passed, json!({"c16_min": rep.c16_min, "c16_max": rep.c16_max, "c14_max": rep.c14_max})))
}

fn conditions_o(ctx: &mut Ctx) -> TaskResult {
  let cfg = ctx.cfg;
  let symbol = spec_of(cfg)?.symbol().ok_or_else(|| config_err("process", "the process has no symbol"))?;
  let o = &cfg.o;
  let seed = ctx.seed("o4");
  let grids = OGrids {
    lo: o.lo.clone(),
    hi: o.hi.clone(),
    centers_per_axis: o.centers_per_axis,
    radii: o.radii.clone(),
    ball_points: o.ball_points,
    o4_paths: o.o4_paths,
    o4_time_fraction: o.o4_time_fraction,
    o4_max_half_width: o.o4_max_half_width,
    seed,
  };
  let rep = check_conditions_o(&symbol, &grids)?;
  let centers = box_grid(&o.lo, &o.hi, o.centers_per_axis);
  let sandwich = verify_phi_h_sandwich(&symbol, &centers, &o.radii, o.sandwich_c_max)?;
  let d = symbol.dim();
  let header: Vec<String> = (0..d).map(|i| format!("x{i}")).chain(["r".into(), "two_h_phi".into()]).collect();
  let rows: Vec<Vec<f64>> =
    sandwich.points.iter().map(|(x, r, v)| x.iter().copied().chain([*r, *v]).collect()).collect();
  ctx.csv("sandwich.csv", &header.join(","), &rows)?;
  ctx.json("conditions_o.json", &json!({"conditions": rep, "sandwich": sandwich}))?;
  Ok((
    rep.passed && sandwich.passed,
    json!({"o_passed": rep.passed, "sandwich_min": sandwich.min_ratio, "sandwich_max": sandwich.max_ratio, "sandwich_passed": sandwich.passed}),
  ))
}

fn ndl(ctx: &mut Ctx) -> TaskResult {
  let cfg = ctx.cfg;
  let spec = spec_of(cfg)?;
  let seed = ctx.seed("ndl");
  let rep = check_ndl(spec, &cfg.grids.x[0], cfg.grids.r[0], cfg.ndl.eta, cfg.paths, seed, ctx.workers)?;
  let d = spec.dim();
  let header: Vec<String> =
    (0..d).map(|i| format!("y{i}")).chain(["density".into(), "lo".into(), "hi".into()]).collect();
  let rows: Vec<Vec<f64>> =
    rep.bins.iter().map(|(y, p, lo, hi)| y.iter().copied().chain([*p, *lo, *hi]).collect()).collect();
  ctx.csv("ndl.csv", &header.join(","), &rows)?;
  ctx.json("ndl.json", &rep)?;
  Ok((
    rep.passed,
    json!({"survivors": rep.survivors, "min_density": rep.min_density, "min_density_lo": rep.min_density_lo, "c_l": rep.c_l}),
  ))
}

fn scale_function(cfg: &ExperimentConfig, x: &[f64]) -> Result<Box<dyn ScaleFunction>, CliError> {
  Ok(match (&cfg.lil.scale, &cfg.process) {
    (ScaleConfig::Power { c, beta }, _) => Box::new(PowerScale { c: *c, beta: *beta }),
    (ScaleConfig::GeometricStable { beta }, _) => Box::new(GeometricStableScale { beta: *beta }),
    (ScaleConfig::LogCorrectedPower { alpha, gamma }, _) => {
      Box::new(LogCorrectedPowerScale { alpha: *alpha, gamma: *gamma })
    }
    (ScaleConfig::Process { .. }, ProcessConfig::Lattice(l)) => Box::new(PowerScale { c: 1.0, beta: l.alpha }),
    (ScaleConfig::Process { r_min, r_max, per_decade }, ProcessConfig::Spec(s)) => {
      Box::new(s.phi_table(x, *r_min, *r_max, *per_decade)?)
    }
  })
}

fn lil(ctx: &mut Ctx, direction: Direction) -> TaskResult {
  let cfg = ctx.cfg;
  let lc = &cfg.lil;
  let grid = ratio_grid(direction, lc.t_min, lc.t_max, lc.q.unwrap_or(direction.default_ratio()))?;
  let field = build_lattice(cfg)?;
  let n = cfg.paths;
  let groups: Vec<Vec<usize>> = if lc.groups > 1 {
    let size = n / lc.groups;
    if size == 0 {
      return Err(config_err("lil.groups", "more seed groups than paths"));
    }
    (0..lc.groups).map(|g| (g * size..(g + 1) * size).collect()).collect()
  } else {
    vec![]
  };
  let checks = &cfg.checks;
  let mut passed = true;
  let mut centers = Vec::new();
  for (ix, x) in cfg.grids.x.iter().enumerate() {
    let phi = scale_function(cfg, x)?;
    let seed = ctx.seed(&format!("lil_x{ix}"));
    let mut censored = 0usize;
    let curves: Vec<RatioCurve> = match (&cfg.process, &field) {
      (ProcessConfig::Spec(spec), _) => {
        simulate_curves(spec, x, phi.as_ref(), direction, &grid, n, seed, &lc.monitor, ctx.workers)?
      }
      (ProcessConfig::Lattice(l), Some(f)) => {
        if direction == Direction::AtZero {
          return Err(config_err("task", "lattice walks have no small-time regime"));
        }
        let site: Vec<i64> = x.iter().map(|c| c.round() as i64).collect();
        let t_end = grid.iter().cloned().fold(0.0, f64::max);
        let results = par_map(n, ctx.workers, |i| -> lil_lab::Result<(RatioCurve, bool)> {
          let walk = simulate_walk(f, l.walk, &site, t_end, &mut path_rng(seed, i as u64))?;
          Ok((ratio_at_infinity(&walk.path, phi.as_ref(), &grid, i)?, walk.censored))
        });
        let mut out = Vec::with_capacity(n);
        for r in results {
          let (c, cens) = r?;
          censored += cens as usize;
          out.push(c);
        }
        out
      }
      _ => unreachable!("lattice configs carry a field"),
    };
    let est = aggregate(&curves, &groups, lc.last_decades)?;
    let medians = decade_medians(&curves);
    let k = grid.len();
    let rows: Vec<Vec<f64>> = (0..k)
      .map(|j| {
        let ratios: Vec<f64> = curves.iter().map(|c| c.ratios[j]).collect();
        let mins: Vec<f64> = curves.iter().map(|c| c.window_min[j]).collect();
        vec![grid[j], median(&ratios), median(&mins)]
      })
      .collect();
    ctx.csv(&format!("lil_x{ix}.csv"), "t,ratio,window_min", &rows)?;
    let mut decade_rows = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (j, m) in medians.iter().enumerate() {
      let vals: Vec<f64> = curves.iter().map(|c| c.windowed_minima[j].min).collect();
      let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
      let vmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
      lo = lo.min(vmin);
      hi = hi.max(vmax);
      let mut sorted = vals.clone();
      sorted.sort_by(f64::total_cmp);
      decade_rows.push(vec![
        m.decade as f64,
        m.min,
        vmin,
        quantile_lower(&sorted, 0.1),
        quantile_lower(&sorted, 0.9),
        vmax,
      ]);
    }
    ctx.csv(&format!("decades_x{ix}.csv"), "decade,median,min,q10,q90,max", &decade_rows)?;
    if lc.write_curves {
      for c in &curves {
        ctx.write(&format!("curves_x{ix}/path_{:05}.csv", c.path_id), c.to_csv(Some(&ctx.prov)).as_bytes())?;
      }
    }
    let final_mins: Vec<f64> = curves.iter().map(|c| *c.window_min.last().expect("nonempty grid")).collect();
    let final_median = median(&final_mins);
    let dm: Vec<f64> = medians.iter().map(|m| m.min).collect();
    let spread =
      dm.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / dm.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut verdicts = BTreeMap::new();
    if let Some((a, b)) = checks.median_bracket {
      verdicts.insert("median_bracket", a <= final_median && final_median <= b);
    }
    if let Some((a, b)) = checks.minima_bracket {
      verdicts.insert("minima_bracket", lo > a && hi <= b);
    }
    if let Some(m) = checks.decade_spread_max {
      verdicts.insert("decade_spread", spread <= m);
    }
    if let Some(m) = checks.stability_max {
      verdicts.insert("stability", est.stability_ratio < m);
    }
    if field.is_some() {
      verdicts.insert("uncensored", censored == 0);
    }
    passed &= verdicts.values().all(|&v| v);
    centers.push(json!({
      "x": x,
      "estimate": est,
      "decade_medians": medians,
      "final_window_min_median": final_median,
      "minima_range": [lo, hi],
      "decade_spread": spread,
      "censored": censored,
      "checks": verdicts,
    }));
  }
  let summary = json!({"direction": direction, "t_grid_len": grid.len(), "centers": centers});
  ctx.json("lil.json", &summary)?;
  Ok((passed, summary))
}

fn meyer(ctx: &mut Ctx) -> TaskResult {
  let cfg = ctx.cfg;
  let spec = spec_of(cfg)?;
  let x = &cfg.grids.x[0];
  let (rho, time, n) = (cfg.meyer.rho, cfg.meyer.time, cfg.paths);
  let split = meyer_split(spec, rho)?;
  let direct_seed = ctx.seed("direct");
  let meyer_seed = ctx.seed("meyer");
  let radial = |v: &[f64], y: &[f64]| {
    if v.len() == 1 {
      v[0] - y[0]
    } else {
      lil_lab::num::dist(v, y)
    }
  };
  let direct: Vec<f64> =
    sample_endpoints(spec, x, time, n, direct_seed, ctx.workers)?.iter().map(|v| radial(v, x)).collect();
  let paths = sample_meyer_paths(spec, rho, x, &[time], n, meyer_seed, &StepRule::default(), None, ctx.workers)?;
  let meyer: Vec<f64> = paths.iter().map(|m| radial(&m.path.positions[0], x)).collect();
  let ks = ks_two_sample(&direct, &meyer);
  let counts: Vec<f64> = paths.iter().map(|m| m.reattached.len() as f64).collect();
  let count = Estimate::from_samples(&counts);
  let expected = split.intensity * time;
  let sigma = (expected / n as f64).sqrt();
  let count_ok = (count.value - expected).abs() <= 3.0 * sigma;
  let ks_ok = ks.p_value > cfg.checks.ks_p_min.unwrap_or(0.01);
  let (mut a, mut b) = (direct.clone(), meyer.clone());
  a.sort_by(f64::total_cmp);
  b.sort_by(f64::total_cmp);
  let rows: Vec<Vec<f64>> = (1..100)
    .map(|k| {
      let p = k as f64 / 100.0;
      vec![p, quantile_lower(&a, p), quantile_lower(&b, p)]
    })
    .collect();
  ctx.csv("meyer_quantiles.csv", "p,direct,meyer", &rows)?;
  let summary = json!({
    "rho": rho,
    "time": time,
    "ks_statistic": ks.statistic,
    "ks_p_value": ks.p_value,
    "mean_reattached": count,
    "expected_reattached": expected,
    "sigma": sigma,
    "ks_passed": ks_ok,
    "count_passed": count_ok,
  });
  ctx.json("meyer.json", &summary)?;
  Ok((ks_ok && count_ok, summary))
}

fn scale_table(ctx: &mut Ctx) -> TaskResult {
  let cfg = ctx.cfg;
  let spec = spec_of(cfg)?;
  let sc = &cfg.scale;
  let table = spec.phi_table(&cfg.grids.x[0], sc.r_min, sc.r_max, sc.per_decade)?;
  ctx.write("scale.csv", table.to_csv(Some(&ctx.prov)).as_bytes())?;
  let rep = check_scaling(&table, sc.window.unwrap_or((sc.r_min, sc.r_max)))?;
  ctx.json("scale.json", &rep)?;
  Ok((rep.passed, json!({"beta_lower": rep.beta_lower, "beta_upper": rep.beta_upper, "passed": rep.passed})))
}
