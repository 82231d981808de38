use std::fs;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unruh-cavity"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: [&str; 6] = ["--modes", "8", "--pt-modes", "16", "--accelerations", "0.5,1.0,1.5"];

#[test]
fn sweep_writes_files_and_compare_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec!["sweep", "--out", out, "--workers", "2"];
    args.extend(SMALL);
    let o = bin(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "sweep.csv",
        "fits.csv",
        "temperature_vs_acceleration.csv",
        "bc_differences.csv",
        "trajectory.csv",
        "run.json",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let sweep = dir.path().join("sweep.csv");
    let o = bin(&["compare", "--from", sweep.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("dirichlet-neumann"), "{text}");
    assert_eq!(text.lines().filter(|l| l.contains("slope")).count(), 6 + 6);
}

#[test]
fn single_prints_json_row() {
    let mut args = vec!["single", "--bc", "periodic", "-a", "1.2", "--engine", "np"];
    args.extend(&SMALL[..2]);
    let o = bin(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["row"]["bc"], "periodic");
    assert!(v["row"]["nu"].as_f64().unwrap() > 1.0);
    assert!(v["row"]["p_pert"].is_null());
}

#[test]
fn single_needs_one_boundary_condition() {
    let o = bin(&["single", "-a", "1.0", "--modes", "4"]);
    assert!(!o.status.success());
}

#[test]
fn config_file_is_layered_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "np_modes = 6\nbcs = [\"neumann\"]\nengine = \"np\"\n").unwrap();
    let o = bin(&[
        "single",
        "--config",
        cfg.to_str().unwrap(),
        "-a",
        "0.7",
        "--modes",
        "10",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["row"]["bc"], "neumann");
    assert!(v["diagnostics"]["np_stats"]["accepted"].as_u64().unwrap() > 0);
}

#[test]
fn momentum_coupling_rejected_for_mirrors() {
    let o = bin(&[
        "single",
        "--bc",
        "dirichlet",
        "--coupling",
        "xp",
        "-a",
        "1.0",
        "--modes",
        "4",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn converge_flags_unconverged_counts() {
    let o = bin(&["converge", "--bc", "dirichlet", "-a", "1.5", "--modes-list", "4,8"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().ends_with("true"));
}

#[test]
fn grid_below_floor_rejected() {
    let o = bin(&["sweep", "--out", "/nonexistent-dir", "--accelerations", "0.01,0.5"]);
    assert!(!o.status.success());
}
