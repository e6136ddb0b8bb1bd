use std::path::Path;
use std::process::Command;

use throttle_core::strategies::StrategyRegistry;
use throttle_harness::report::{csv_string, render_svg, CSV_HEADER};
use throttle_harness::{run_experiment, ExperimentConfig, RunOptions};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_throttle"))
}

const SMALL: &str = r#"
experiment_id = "small"
horizons = [64, 128, 256, 512]
replications = 12
seed = 9
info_mode = "partial"

[instance]
kind = "gap"

[[strategy]]
name = "ogd-cb"

[[strategy]]
name = "always-skip"

[[strategy]]
name = "pacing"
"#;

fn small_config() -> ExperimentConfig {
    ExperimentConfig::from_toml(SMALL, Path::new(".")).unwrap()
}

#[test]
fn reports_are_reproducible_and_order_independent() {
    let reg = StrategyRegistry::with_builtins();
    let cfg = small_config();
    let a = csv_string(&run_experiment(&cfg, &reg, RunOptions { parallel: true }).unwrap());
    let b = csv_string(&run_experiment(&cfg, &reg, RunOptions { parallel: true }).unwrap());
    let c = csv_string(&run_experiment(&cfg, &reg, RunOptions { parallel: false }).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    let header = a.lines().next().unwrap();
    assert_eq!(header, CSV_HEADER.join(","));
    assert_eq!(a.lines().count(), 1 + 4 * 3);
}

#[test]
fn always_skip_earns_nothing_in_every_cell() {
    let reg = StrategyRegistry::with_builtins();
    let report = run_experiment(&small_config(), &reg, RunOptions::default()).unwrap();
    for cell in report.cells.iter().filter(|c| c.strategy == "always-skip") {
        assert_eq!(cell.stats.mean_reward, 0.0);
        assert!(cell.episodes.iter().all(|e| e.reward == 0.0));
    }
    for cell in report.cells.iter().filter(|c| c.strategy == "ogd-cb") {
        assert_eq!(cell.stats.invariant_violations, 0);
        let fluid = cell.opt_fluid.unwrap();
        assert!((fluid - 0.10).abs() < 1e-12);
        assert!((cell.opt_dlp.unwrap() - 0.20).abs() < 1e-12);
    }
    assert_eq!(report.slopes.len(), 3);
    assert!(render_svg(&report).contains("<polyline"));
}

#[test]
fn run_subcommand_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        SMALL.replace("info_mode = \"partial\"", "info_mode = \"partial\"\noutput = \"out/r.csv\"\nsvg = \"r.svg\""),
    )
    .unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/r.csv")).unwrap();
    assert!(csv.starts_with("experiment_id,instance,strategy"));
    assert!(dir.path().join("r.svg").exists());

    let out2 = bin().args(["run", "--serial", "--output"]).arg(dir.path().join("s.csv")).arg(&cfg).output().unwrap();
    assert!(out2.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("s.csv")).unwrap(), csv);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SMALL.replace("replications = 12", "replications = 0")).unwrap();
    assert_eq!(bin().arg("run").arg(&cfg).status().unwrap().code(), Some(1));
    assert_eq!(bin().args(["run", "/nonexistent.toml"]).status().unwrap().code(), Some(1));
    assert_eq!(bin().args(["bench", "nope", "10"]).status().unwrap().code(), Some(1));
}

#[test]
fn file_instances_run_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let inst = throttle_core::instances::make_random_instance(4, 3, 3, 0.25, 50).unwrap();
    std::fs::write(dir.path().join("rand.txt"), inst.to_text()).unwrap();
    std::fs::write(
        dir.path().join("exp.toml"),
        r#"
experiment_id = "file"
horizons = [50, 100]
replications = 3
output = "f.csv"
[instance]
file = "rand.txt"
[[strategy]]
name = "static"
"#,
    )
    .unwrap();
    let out = bin().arg("run").arg(dir.path().join("exp.toml")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let bench = bin().arg("bench").arg(dir.path().join("rand.txt")).arg("80").output().unwrap();
    assert!(bench.status.success());
    assert!(String::from_utf8_lossy(&bench.stdout).contains("hindsight"));
}

#[test]
fn identity_and_validate_subcommands() {
    let out = bin().args(["identity-check", "64"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("16 of 16"));
    let out = bin().arg("validate").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    let out = bin().args(["bench", "thm1", "64"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("fluid OPT/T          0.500000"), "{text}");
}
