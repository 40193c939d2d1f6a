use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pseudoinv::cli::manifest::{read_manifest, sha256_hex};

fn pseudoinv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudoinv"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn simulate_writes_moments_snapshots_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = pseudoinv(&dir, &["simulate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let moments = rows(&dir.join("moments.csv"));
    assert_eq!(moments.len(), 181);
    assert!(moments.iter().all(|r| r.len() == 9 && r[7] >= 0.5));
    for k in 0..5 {
        assert!(dir.join(format!("psi_t{k}.csv")).exists());
    }
    let manifest = read_manifest(&dir).expect("manifest written");
    assert_eq!(manifest.files.len(), 6);
    for f in &manifest.files {
        assert_eq!(sha256_hex(&fs::read(dir.join(&f.name)).unwrap()), f.sha256);
    }
    let text = fs::read_to_string(dir.join("moments.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
}

#[test]
fn horizon_past_the_root_of_b_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pseudoinv(tmp.path(), &["simulate", "--t-max", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("t* = 2.000000"), "{stderr}");
    assert!(read_manifest(tmp.path()).is_none());
}

#[test]
fn override_flag_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("inconsistent.toml");
    fs::write(&config, "[scenario]\nc0 = -1.0\n").unwrap();
    let config = config.to_str().unwrap();
    let dir = tmp.path().join("run");
    let refused = pseudoinv(&dir, &["simulate", "--config", config]);
    assert_eq!(refused.status.code(), Some(2));
    let accepted = pseudoinv(&dir, &["simulate", "--config", config, "--override-consistency"]);
    assert!(accepted.status.success(), "{}", String::from_utf8_lossy(&accepted.stderr));
    let manifest = read_manifest(&dir).unwrap();
    assert!(manifest.override_consistency);
    assert!(manifest.config.scenario.override_consistency);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "[scenario]\nb0 = \"two\"\n").unwrap();
    let out = pseudoinv(&tmp.path().join("run"), &["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = pseudoinv(&tmp.path().join("run"), &["simulate", "--drive", "sawtooth:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        assert!(pseudoinv(dir, &["figures", "--t-max", "1.2", "--grid-points", "301"]).status.success());
    }
    let (ma, mb) = (read_manifest(&a).unwrap(), read_manifest(&b).unwrap());
    assert_eq!(ma.files, mb.files);
    for f in &ma.files {
        assert_eq!(fs::read(a.join(&f.name)).unwrap(), fs::read(b.join(&f.name)).unwrap());
    }
}

#[test]
fn figures_reproduce_closed_form_values() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("figs");
    assert!(pseudoinv(&dir, &["figures"]).status.success());
    let fig1a = rows(&dir.join("fig1a.csv"));
    assert_eq!(fig1a[0], vec![0.0, 4.0, 1.0625]);
    let fig1b = rows(&dir.join("fig1b.csv"));
    let at_one = fig1b.iter().find(|r| r[0] == 1.0).unwrap();
    assert!((at_one[1] - 1.0625).abs() <= 1e-9);
    let fig2 = rows(&dir.join("fig2.csv"));
    let manifest = read_manifest(&dir).unwrap();
    let dx = (manifest.grids.space_max - manifest.grids.space_min) / (manifest.grids.space_points - 1) as f64;
    let mut times: Vec<f64> = fig2.iter().map(|r| r[0]).collect();
    times.dedup();
    assert_eq!(times.len(), 37);
    for t in times {
        let peak = fig2.iter().filter(|r| r[0] == t).max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
        assert!((peak[1] - (1.0 + t)).abs() <= 0.5 * dx + 1e-12, "t={t} peak at {}", peak[1]);
    }
}

#[test]
fn verify_passes_on_defaults_and_flags_corruption() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good");
    let out = pseudoinv(&good, &["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(good.join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["hermitian_limit"], false);

    let bad = tmp.path().join("bad");
    let out = pseudoinv(&bad, &["verify", "--corrupt-phase"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tdse_residual"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(bad.join("verify_report.json")).unwrap()).unwrap();
    assert!(report["failures"].as_array().unwrap().iter().any(|f| f == "tdse_residual"));
    assert!(read_manifest(&bad).is_some());
}

#[test]
fn verify_marks_the_hermitian_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("free");
    let out = pseudoinv(&dir, &["verify", "--drive", "constant:0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report["hermitian_limit"], true);
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"l2_norm_conservation"));
    assert!(!names.contains(&"l2_norm_drift"));
}

#[test]
fn directory_without_manifest_is_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("stale");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("moments.csv"), "partial").unwrap();
    assert!(read_manifest(&dir).is_none());
    let out = pseudoinv(&dir, &["simulate", "--t-max", "0.5"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("incomplete run"));
    let manifest = read_manifest(&dir).unwrap();
    assert_eq!(manifest.files.iter().filter(|f| f.name.starts_with("psi_t")).count(), 2);
}
