use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_disperse"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const FREE: &str = "potential = \"zero\"\n[grid]\npoints = 512\n[scatter]\ntau_count = 50\n";

#[test]
fn free_scatter_passes_and_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["scatter"], Some(FREE));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
    assert!(stdout.contains("free_transmission"));
    let summary = json(&dir.path().join("out/summary.json"));
    assert_eq!(summary["class"].as_str().unwrap().to_lowercase(), "transparent");
    let table = fs::read_to_string(dir.path().join("out/scattering.csv")).unwrap();
    // Header, four near-zero stencil points, then the requested grid.
    assert_eq!(table.lines().count(), 1 + 4 + 50);
}

#[test]
fn manifest_records_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["scatter"], Some(FREE)).status.code(), Some(0));
    let manifest = json(&dir.path().join("out/manifest.json"));
    let resolved = fs::read_to_string(dir.path().join("out/config.toml")).unwrap();
    let hex: String = Sha256::digest(resolved.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest["config_digest"], hex.as_str());
    assert_eq!(manifest["config"], resolved.as_str());
    assert_eq!(manifest["subcommand"], "scatter");
    assert_eq!(manifest["passed"], true);
    assert!(manifest["timings"]["wall_seconds"].as_f64().unwrap() >= 0.0);
    for file in manifest["outputs"].as_array().unwrap() {
        assert!(dir.path().join("out").join(file.as_str().unwrap()).exists());
    }
    // The resolved config is itself a valid config that reproduces the run.
    let again = tempfile::tempdir().unwrap();
    assert_eq!(run(again.path(), &["scatter"], Some(&resolved)).status.code(), Some(0));
    assert_eq!(json(&again.path().join("out/manifest.json"))["config_digest"], hex.as_str());
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = "[grid]\npoints = 512\n[scatter]\ntau_count = 40\n";
    assert_eq!(run(a.path(), &["scatter"], Some(config)).status.code(), Some(0));
    assert_eq!(run(b.path(), &["scatter", "--threads", "1"], Some(config)).status.code(), Some(0));
    for file in ["scattering.csv", "summary.json", "config.toml"] {
        assert_eq!(fs::read(a.path().join("out").join(file)).unwrap(), fs::read(b.path().join("out").join(file)).unwrap(), "{file}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["[grid]\npoints = 7\n", "potential = \"moat(depth=1)\"\n", "[grid\n", "frobnicate = 1\n"] {
        let out = run(dir.path(), &["scatter"], Some(text));
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_disperse"))
        .args(["scatter", "--config", "/nonexistent/config.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let scale = run(dir.path(), &["scatter", "--resolution-scale", "0"], None);
    assert_eq!(scale.status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[grid]\npoints = 512\n[scatter]\ntau_count = 20\nunitarity_tolerance = 1e-300\n";
    let out = run(dir.path(), &["scatter"], Some(text));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL unitarity"));
    assert_eq!(json(&dir.path().join("out/manifest.json"))["passed"], false);
}

#[test]
fn resolution_scale_refines_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["scatter", "--resolution-scale", "2"], Some(FREE));
    assert_eq!(out.status.code(), Some(0));
    let resolved = fs::read_to_string(dir.path().join("out/config.toml")).unwrap();
    assert!(resolved.contains("points = 1024"), "{resolved}");
}
