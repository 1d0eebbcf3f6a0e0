use std::path::Path;
use std::process::{Command, Output};

use tacmm::world::{KinematicNoise, VisionNoise};
use tacmm_harness::config::{ExperimentConfig, Sensing};

fn tacmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tacmm")).args(args).output().unwrap()
}

fn write_config(dir: &Path, c: &ExperimentConfig) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, c.to_json()).unwrap();
    p.display().to_string()
}

#[test]
fn malformed_config_exits_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"seed\": 1,\n  \"lift\": [\n}").unwrap();
    let out = tacmm(&["--config", p.to_str().unwrap(), "lift", "--mode", "vision"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn missing_file_and_bad_csv_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = tacmm(&["--config", "/nonexistent/cfg.json", "lift"]);
    assert_eq!(out.status.code(), Some(1));
    let csv = dir.path().join("x.csv");
    std::fs::write(&csv, "").unwrap();
    let report = dir.path().join("report");
    let out = tacmm(&["report", csv.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!report.exists(), "no partial output on malformed input");
}

#[test]
fn lift_assert_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::calibrated();
    c.lift.sensing = Sensing::Bumper;
    c.lift.trials = 5;
    let cfg = write_config(dir.path(), &c);
    let csv = dir.path().join("lift.csv");
    let csv = csv.to_str().unwrap();

    // A single-mode run has no gap to check.
    let out = tacmm(&["--config", &cfg, "lift", "--mode", "vision", "--out", csv, "--assert"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    let out = tacmm(&["--config", &cfg, "lift", "--out", csv]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("scenario,"));

    // With perfect information both modes lift everything, so there is no gap.
    c.world.kinematic = KinematicNoise::NONE;
    c.world.vision = VisionNoise::NONE;
    let cfg = write_config(dir.path(), &c);
    let out = tacmm(&["--config", &cfg, "lift", "--out", csv, "--assert"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_renders_tables_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::calibrated();
    c.lift.sensing = Sensing::Bumper;
    c.lift.trials = 4;
    let cfg = write_config(dir.path(), &c);
    let csv = dir.path().join("lift.csv");
    assert!(tacmm(&["--config", &cfg, "lift", "--out", csv.to_str().unwrap()]).status.success());
    let out_dir = dir.path().join("rep");
    let out = tacmm(&["report", csv.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("average"), "{text}");
    let svg = std::fs::read_to_string(out_dir.join("lift_0.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}
