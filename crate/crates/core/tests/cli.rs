//! End-to-end runs of the command-line binary: exit codes, artifact layout,
//! and byte-identical reports under identical configuration.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cloakwave"))
}

fn run_causality(dir: &Path) -> std::process::Output {
    bin()
        .args([
            "verify",
            "causality",
            "--scenario",
            "hyperboloid",
            "--a",
            "2",
            "--rays",
            "64",
            "--seed",
            "42",
            "--out",
        ])
        .arg(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn causality_run_writes_reports_and_reruns_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let dir1 = tmp.path().join("run1");
    let dir2 = tmp.path().join("run2");
    let out = run_causality(&dir1);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run_causality(&dir2);
    assert!(out.status.success());
    for name in [
        "report.json",
        "traces/witness_future.csv",
        "traces/witness_past.csv",
    ] {
        let a = fs::read(dir1.join(name)).unwrap();
        let b = fs::read(dir2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert!(!a.is_empty());
    }
    // Figures consume the run directory.
    let out = bin()
        .args(["figures", "--scenario", "hyperboloid", "--from"])
        .arg(&dir1)
        .arg("--out")
        .arg(&dir1)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir1.join("figures/curves.csv").exists());
    assert!(dir1.join("figures/witness_future.csv").exists());
}

#[test]
fn invalid_configuration_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    // r0 below the horizon radius.
    let out = bin()
        .args([
            "verify",
            "causality",
            "--scenario",
            "kruskal",
            "--r0",
            "0.5",
            "--out",
        ])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Unknown scenario name.
    let out = bin()
        .args(["witness", "--scenario", "nonsense", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Figures without a prior report.
    let out = bin()
        .args(["figures", "--scenario", "hyperboloid", "--out"])
        .arg(tmp.path().join("empty"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_overrides_and_env_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.json");
    fs::write(
        &cfg_path,
        r#"{"scenario": "hyperboloid", "rays": 32, "seed": 5}"#,
    )
    .unwrap();
    let out_dir = tmp.path().join("envout");
    let out = bin()
        .args(["witness", "--config"])
        .arg(&cfg_path)
        .args(["--rc", "1.0"])
        .env("CLOAKWAVE_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("report.json").exists());
    assert!(out_dir.join("traces/curvature_blended.csv").exists());
    let text = fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(text.contains("\"rays\": 32"));
}
