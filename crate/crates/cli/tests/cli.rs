use std::path::Path;
use std::process::Command;

use lil_lab::io::csv_body;
use lil_lab::samplers::ProcessSpec;
use lil_lab::symbols::{Field, SymbolSpec};
use lil_lab_cli::config::{ProcessConfig, Task};
use lil_lab_cli::{presets, run_config, run_file, CliError, ExperimentConfig};
use serde_json::Value;

const EXAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/stable_exit.toml");

fn bin() -> Command {
  Command::new(env!("CARGO_BIN_EXE_lil-lab"))
}

fn manifest(dir: &Path) -> Value {
  serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn example_config_runs_and_passes() {
  let tmp = tempfile::tempdir().unwrap();
  let st = bin().args(["run", EXAMPLE, "--out"]).arg(tmp.path()).status().unwrap();
  assert_eq!(st.code(), Some(0));
  for f in ["exit_stats.json", "tail.csv", "survival.csv", "manifest.json"] {
    assert!(tmp.path().join(f).exists(), "{f}");
  }
  let m = manifest(tmp.path());
  assert_eq!(m["status"], "pass");
  assert_eq!(m["files"].as_array().unwrap().len(), 3);
  let tail = std::fs::read_to_string(tmp.path().join("tail.csv")).unwrap();
  assert!(tail.starts_with(&format!("# config_hash={}", m["config_hash"].as_str().unwrap())));
}

#[test]
fn reruns_are_byte_identical() {
  let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
  run_file(Path::new(EXAMPLE), Some(a.path())).unwrap();
  run_file(Path::new(EXAMPLE), Some(b.path())).unwrap();
  for f in ["tail.csv", "survival.csv"] {
    let x = std::fs::read_to_string(a.path().join(f)).unwrap();
    let y = std::fs::read_to_string(b.path().join(f)).unwrap();
    assert_eq!(x, y);
    assert!(!csv_body(&x).starts_with('#'));
  }
  let (mut ma, mut mb) = (manifest(a.path()), manifest(b.path()));
  for m in [&mut ma, &mut mb] {
    let o = m.as_object_mut().unwrap();
    o.remove("timestamp");
    o.remove("wall_time_s");
  }
  assert_eq!(ma, mb);
}

#[test]
fn unknown_task_names_the_field() {
  let text = "name = \"x\"\nseed = 1\ntask = \"lil_sideways\"\n[process]\nkind = \"one_d_stable\"\nalpha = 1.5\nnorm = \"symbol\"\n";
  match ExperimentConfig::parse(text) {
    Err(CliError::Config { field, line, .. }) => {
      assert_eq!(field.as_deref(), Some("task"));
      assert_eq!(line, Some(3));
    }
    other => panic!("{other:?}"),
  }
  let tmp = tempfile::tempdir().unwrap();
  let p = tmp.path().join("bad.toml");
  std::fs::write(&p, text).unwrap();
  let out = bin().arg("run").arg(&p).output().unwrap();
  assert_eq!(out.status.code(), Some(2));
  assert!(String::from_utf8_lossy(&out.stderr).contains("`task`"));
}

#[test]
fn malformed_values_report_a_line() {
  let text = "name = \"x\"\nseed = 1\ntask = \"exit_stats\"\npaths = \"many\"\n[process]\nkind = \"one_d_stable\"\nalpha = 1.5\nnorm = \"symbol\"\n";
  match ExperimentConfig::parse(text) {
    Err(CliError::Config { line: Some(4), .. }) => {}
    other => panic!("{other:?}"),
  }
}

#[test]
fn unknown_preset_is_an_error() {
  assert!(matches!(presets::preset("nope"), Err(CliError::UnknownPreset(_))));
  let out = bin().args(["preset", "nope"]).output().unwrap();
  assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_preset_parses_and_round_trips() {
  let names: Vec<&str> = presets::names().collect();
  assert_eq!(names, ["e_non", "e_kkk19", "e_feller", "e_singular", "rcm_vsrw", "geom_stable_hunt"]);
  for n in names {
    let cfg = presets::preset(n).unwrap();
    assert_eq!(cfg.name, n);
    assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg, "{n}");
  }
  let listed = bin().arg("list-presets").output().unwrap();
  assert_eq!(String::from_utf8_lossy(&listed.stdout).lines().count(), 6);
  let emitted = bin().args(["preset", "e_feller", "--emit"]).output().unwrap();
  assert_eq!(String::from_utf8_lossy(&emitted.stdout), presets::source("e_feller").unwrap());
}

#[test]
fn e_feller_is_a_two_center_varying_order_run() {
  let cfg = presets::preset("e_feller").unwrap();
  assert_eq!(cfg.task, Task::LilZero);
  assert_eq!(cfg.grids.x.len(), 2);
  let ProcessConfig::Spec(ProcessSpec::StableLike { symbol: SymbolSpec::VaryingOrder { alpha, .. }, .. }) =
    &cfg.process
  else {
    panic!("{:?}", cfg.process);
  };
  assert!(matches!(alpha, Field::Ramp { .. }));
  let a: Vec<f64> = cfg.grids.x.iter().map(|x| alpha.at(x)).collect();
  assert!((a[0] - 1.2).abs() < 1e-3 && (a[1] - 1.8).abs() < 1e-3, "{a:?}");
}

#[test]
fn rcm_vsrw_is_the_planar_lattice() {
  let cfg = presets::preset("rcm_vsrw").unwrap();
  let ProcessConfig::Lattice(l) = &cfg.process else { panic!() };
  assert_eq!((l.d, l.alpha), (2, 1.5));
  assert_eq!(cfg.grids.r, [8.0, 16.0, 32.0]);
  assert_eq!(cfg.paths, 5000);
}

#[test]
fn failed_checks_exit_with_one() {
  let tmp = tempfile::tempdir().unwrap();
  let mut cfg = ExperimentConfig::parse(&std::fs::read_to_string(EXAMPLE).unwrap()).unwrap();
  cfg.grids.r = vec![0.5, 1.0];
  cfg.paths = 500;
  cfg.checks.slope_targets = Some(vec![0.5]);
  let o = run_config(&cfg, Some(tmp.path())).unwrap();
  assert!(!o.passed);
  assert_eq!(o.exit_code(), 1);
  assert_eq!(manifest(tmp.path())["status"], "check_fail");
  assert!(tmp.path().join("scaling.csv").exists() && tmp.path().join("tail_x0_r1.csv").exists());
}

#[test]
fn runtime_errors_are_recorded_in_the_manifest() {
  let tmp = tempfile::tempdir().unwrap();
  let mut cfg = ExperimentConfig::parse(&std::fs::read_to_string(EXAMPLE).unwrap()).unwrap();
  cfg.exit.dt = Some(1e-3);
  cfg.exit.horizon = Some(1e-2);
  let e = run_config(&cfg, Some(tmp.path())).unwrap_err();
  assert_eq!(e.exit_code(), 3);
  let m = manifest(tmp.path());
  assert_eq!(m["status"], "error");
  assert!(m["error"].as_str().unwrap().contains("censor"), "{m}");
}

#[test]
fn lattice_rejects_small_time_tasks() {
  let text = presets::source("rcm_vsrw").unwrap().replace("task = \"exit_stats\"", "task = \"lil_zero\"");
  assert!(matches!(ExperimentConfig::parse(&text), Err(CliError::Config { .. })));
}

#[test]
fn thread_count_does_not_change_outputs() {
  let mut cfg = presets::preset("e_kkk19").unwrap();
  cfg.paths = 8;
  let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
  cfg.workers = Some(1);
  run_config(&cfg, Some(a.path())).unwrap();
  cfg.workers = Some(4);
  run_config(&cfg, Some(b.path())).unwrap();
  for f in ["lil_x0.csv", "decades_x0.csv"] {
    let x = std::fs::read_to_string(a.path().join(f)).unwrap();
    let y = std::fs::read_to_string(b.path().join(f)).unwrap();
    assert_eq!(csv_body(&x), csv_body(&y), "{f}");
  }
}

#[test]
fn small_tasks_write_their_artifacts() {
  let base = "seed = 3\npaths = 400\n[process]\nkind = \"one_d_stable\"\nalpha = 1.5\nnorm = \"symbol\"\n";
  let vo = "seed = 3\n[process]\nkind = \"stable_like\"\n[process.symbol]\nkind = \"varying_order\"\nd = 1\n\
            alpha = { kind = \"ramp\", from = 1.2, to = 1.8, center = 0.0, width = 0.5 }\n\
            gamma = { kind = \"constant\", value = 0.0 }\n[o]\no4_paths = 200\no4_max_half_width = 0.1\n";
  let cases = [
    ("scale_table", base, vec!["scale.csv", "scale.json"]),
    ("check_pruitt", base, vec!["pruitt.csv", "pruitt.json"]),
    ("check_NDL", base, vec!["ndl.csv", "ndl.json"]),
    ("check_B", base, vec!["means.csv", "conditions.json"]),
    ("meyer_equiv", base, vec!["meyer_quantiles.csv", "meyer.json"]),
    ("check_O", vo, vec!["sandwich.csv", "conditions_o.json"]),
  ];
  for (task, body, files) in cases {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(&format!("name = \"{task}\"\ntask = \"{task}\"\n{body}")).unwrap();
    run_config(&cfg, Some(tmp.path())).unwrap_or_else(|e| panic!("{task}: {e}"));
    for f in files {
      assert!(tmp.path().join(f).exists(), "{task}: {f}");
    }
    assert!(manifest(tmp.path())["status"] != "error");
  }
}
