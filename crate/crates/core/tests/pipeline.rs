use std::fs;

use unruh_cavity::output::{parse_sweep_csv, read_config_header, write_outputs, SWEEP_COLUMNS, TRAJECTORY_SAMPLES};
use unruh_cavity::sweep::run_sweep;
use unruh_cavity::{Engine, RunConfig};

fn small() -> RunConfig {
    RunConfig {
        np_modes: 12,
        pt_modes: 24,
        accelerations: vec![0.3, 0.9, 1.5],
        workers: 2,
        ..Default::default()
    }
}

#[test]
fn reruns_write_identical_files() {
    let cfg = small();
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let f1 = write_outputs(&run_sweep(&cfg).unwrap(), d1.path()).unwrap();
    let f2 = write_outputs(&run_sweep(&cfg).unwrap(), d2.path()).unwrap();
    for (a, b) in [
        (&f1.sweep, &f2.sweep),
        (&f1.temperature_curves, &f2.temperature_curves),
        (&f1.differences, &f2.differences),
        (&f1.trajectory, &f2.trajectory),
    ] {
        assert!(fs::read(a).unwrap() == fs::read(b).unwrap(), "{} differs", a.display());
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let cfg = small();
    let serial = run_sweep(&RunConfig {
        workers: 1,
        ..cfg.clone()
    })
    .unwrap();
    let parallel = run_sweep(&RunConfig { workers: 3, ..cfg }).unwrap();
    assert_eq!(serial.rows, parallel.rows);
    assert_eq!(serial.fits, parallel.fits);
}

#[test]
fn every_file_carries_its_config() {
    let cfg = small();
    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(&run_sweep(&cfg).unwrap(), dir.path()).unwrap();
    for p in [
        &files.sweep,
        &files.fits,
        &files.temperature_curves,
        &files.differences,
        &files.trajectory,
    ] {
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(read_config_header(&text).unwrap(), cfg, "{}", p.display());
    }
    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files.sidecar).unwrap()).unwrap();
    assert_eq!(RunConfig::from_json(&sidecar["config"].to_string()).unwrap(), cfg);
    assert_eq!(sidecar["diagnostics"].as_array().unwrap().len(), 9);
}

#[test]
fn sweep_file_round_trips() {
    let cfg = small();
    let out = run_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(&out, dir.path()).unwrap();
    let text = fs::read_to_string(&files.sweep).unwrap();
    let header = text.lines().nth(1).unwrap();
    assert_eq!(header.split(',').collect::<Vec<_>>(), SWEEP_COLUMNS);
    let (back_cfg, rows) = parse_sweep_csv(&text).unwrap();
    assert_eq!(back_cfg, cfg);
    assert_eq!(rows, out.rows);
}

#[test]
fn trajectory_file_samples_the_window() {
    let cfg = small();
    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(
        &run_sweep(&RunConfig {
            engine: Engine::Np,
            ..cfg
        })
        .unwrap(),
        dir.path(),
    )
    .unwrap();
    let text = fs::read_to_string(&files.trajectory).unwrap();
    let body: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(body.len(), TRAJECTORY_SAMPLES);
    let first: Vec<f64> = body[0].split(',').map(|v| v.parse().unwrap()).collect();
    let mid: Vec<f64> = body[TRAJECTORY_SAMPLES / 2]
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(first[0], -4.0);
    assert_eq!(mid[0], 0.0);
    assert_eq!(mid[1], 0.5 * cfg.cavity_length);
    assert_eq!(mid[2], cfg.lambda0);
}

#[test]
fn uncoupled_sweep_is_cold_everywhere() {
    let cfg = RunConfig {
        lambda0: 0.0,
        ..small()
    };
    let out = run_sweep(&cfg).unwrap();
    assert!(out.failures.is_empty());
    for r in &out.rows {
        assert_eq!(r.nu, Some(1.0));
        assert_eq!(r.p_pert, Some(0.0));
        assert_eq!(r.t_nonpert, Some(0.0));
    }
}
