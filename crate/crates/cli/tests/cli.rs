use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn llocv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llocv")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn keyrate_prints_report() {
    let out = llocv(&["keyrate", "--length-km", "10"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["key_rate"].as_f64().unwrap() > 0.0);
    assert_eq!(v["noise"]["transmittance"].as_f64().unwrap(), 10f64.powf(-0.2));
}

#[test]
fn attack_honours_denominator_flag() {
    let k = |d: &str| {
        let out = llocv(&["--keff-denominator", d, "attack", "--length-km", "20", "--alpha-low", "0"]);
        assert!(out.status.success());
        json(&out)["report"]["k_eff"].as_f64().unwrap()
    };
    assert!(k("as_printed") < k("reconciled"));
}

#[test]
fn critical_distance_found_and_not_found() {
    let out = llocv(&["critical-distance", "--alpha-low", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["critical_km"].as_f64().unwrap() < v["null_key_km"].as_f64().unwrap());

    let out = llocv(&["critical-distance", "--alpha-low", "0.2"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(json(&out)["critical_km"].is_null());
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"preset": "paper2017", "bogus": 1}"#).unwrap();
    assert_eq!(llocv(&["--config", bad.to_str().unwrap(), "keyrate"]).status.code(), Some(2));
    assert_eq!(llocv(&["--preset", "nope", "keyrate"]).status.code(), Some(2));
    assert_eq!(llocv(&["--config", "/nonexistent.json", "keyrate"]).status.code(), Some(2));
    assert_eq!(llocv(&["attack", "--alpha-low", "0.5"]).status.code(), Some(2));
}

#[test]
fn config_file_overrides_preset_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"preset": "paper2017", "length_km": 5, "keff_denominator": "as_printed"}"#).unwrap();
    let out = llocv(&["--config", path.to_str().unwrap(), "attack"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["report"]["scenario"]["length_km"].as_f64(), Some(5.0));
    assert_eq!(v["report"]["keff_denominator"].as_str(), Some("as_printed"));
}

#[test]
fn sweep_and_figure_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = llocv(&["--out-dir", d, "sweep", "--axis", "length_km", "--start", "0", "--stop", "30", "--steps", "31"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep_length_km.csv")).unwrap();
    assert_eq!(csv.lines().count(), 32);

    assert_eq!(llocv(&["sweep", "--axis", "v_a", "--start", "1", "--stop", "2", "--steps", "1"]).status.code(), Some(2));

    assert!(llocv(&["--out-dir", d, "figure", "fig7"]).status.success());
    assert!(dir.path().join("fig7.csv").exists() && dir.path().join("fig7.svg").exists());
    assert_eq!(llocv(&["--out-dir", d, "figure", "fig9"]).status.code(), Some(2));
}

#[test]
fn mc_validate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let run = || {
        let out = llocv(&["--out-dir", d, "--samples", "20000", "--seed", "5", "mc-validate"]);
        assert!(out.status.success());
        let mut v = json(&out);
        v["metadata"]["generated_unix_s"] = Value::Null;
        v
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a["metadata"]["seed"].as_u64(), Some(5));
    assert!(dir.path().join("mc_validate.json").exists());

    let out = llocv(&["--out-dir", d, "--samples", "10", "mc-validate"]);
    assert!(out.status.success());
    assert!(json(&out)["checks"].as_array().unwrap().iter().all(|c| c["status"] == "skipped"));
}
