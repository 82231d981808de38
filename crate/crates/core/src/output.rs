//! CSV data files and the JSON sidecar written by a sweep.
//!
//! Every CSV starts with a `# config: {...}` line holding the full run
//! configuration as JSON, followed by a column header. Floats use 17
//! significant digits so values read back bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::modes::{BoundaryCondition, CouplingScheme};
use crate::sweep::{Source, SweepOutcome, SweepRow};

pub const CONFIG_PREFIX: &str = "# config: ";

pub const SWEEP_COLUMNS: [&str; 16] = [
    "bc",
    "coupling",
    "a",
    "inside",
    "nu",
    "r",
    "delta_thermality",
    "energy_above_ground",
    "t_nonpert",
    "p_nonpert",
    "p_pert",
    "t_boltz",
    "p_pert_matched",
    "cross_engine_rel",
    "pt_tail_fraction",
    "symplectic_residual",
];

/// Number of worldline samples in the trajectory file.
pub const TRAJECTORY_SAMPLES: usize = 401;

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Config comment line followed by a CSV table of `rows` under `columns`.
fn table<I, R>(cfg: &RunConfig, columns: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(format!("{CONFIG_PREFIX}{}\n", cfg.to_json()).into_bytes());
    w.write_record(columns).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Recovers the configuration embedded in the first line of a data file.
pub fn read_config_header(text: &str) -> Result<RunConfig> {
    let first = text.lines().next().unwrap_or_default();
    let json = first
        .strip_prefix(CONFIG_PREFIX)
        .ok_or_else(|| Error::Config("missing config header".into()))?;
    RunConfig::from_json(json)
}

pub fn sweep_csv(cfg: &RunConfig, rows: &[SweepRow]) -> String {
    table(
        cfg,
        &SWEEP_COLUMNS,
        rows.iter().map(|r| {
            [
                r.bc.name().to_string(),
                r.coupling.name().to_string(),
                fmt_float(r.acceleration),
                r.inside.to_string(),
                fmt_opt(r.nu),
                fmt_opt(r.r),
                fmt_opt(r.delta_thermality),
                fmt_opt(r.energy_above_ground),
                fmt_opt(r.t_nonpert),
                fmt_opt(r.p_nonpert),
                fmt_opt(r.p_pert),
                fmt_opt(r.t_boltz),
                fmt_opt(r.p_pert_matched),
                fmt_opt(r.cross_engine_rel),
                fmt_opt(r.pt_tail_fraction),
                fmt_opt(r.symplectic_residual),
            ]
        }),
    )
}

/// Parses a file produced by [`sweep_csv`].
pub fn parse_sweep_csv(text: &str) -> Result<(RunConfig, Vec<SweepRow>)> {
    let cfg = read_config_header(text)?;
    let bad = |e: csv::Error| Error::Config(e.to_string());
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let cols = reader.headers().map_err(bad)?;
    if cols.iter().ne(SWEEP_COLUMNS) {
        return Err(Error::Config(format!(
            "unexpected columns `{}`",
            cols.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(bad)?;
        let field = |j: usize| rec.get(j).unwrap_or_default();
        let num = |j: usize| -> Result<Option<f64>> {
            let s = field(j);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|e| Error::Config(format!("row {}, `{}`: {e}", i + 1, SWEEP_COLUMNS[j])))
        };
        rows.push(SweepRow {
            bc: field(0).parse::<BoundaryCondition>()?,
            coupling: field(1).parse::<CouplingScheme>()?,
            acceleration: num(2)?.ok_or_else(|| Error::Config(format!("row {}: missing acceleration", i + 1)))?,
            inside: field(3)
                .parse::<bool>()
                .map_err(|e| Error::Config(format!("row {}: {e}", i + 1)))?,
            nu: num(4)?,
            r: num(5)?,
            delta_thermality: num(6)?,
            energy_above_ground: num(7)?,
            t_nonpert: num(8)?,
            p_nonpert: num(9)?,
            p_pert: num(10)?,
            t_boltz: num(11)?,
            p_pert_matched: num(12)?,
            cross_engine_rel: num(13)?,
            pt_tail_fraction: num(14)?,
            symplectic_residual: num(15)?,
        });
    }
    Ok((cfg, rows))
}

pub fn fits_csv(out: &SweepOutcome) -> String {
    table(
        &out.config,
        &["bc", "source", "slope", "intercept", "r_squared", "max_residual"],
        out.fits.iter().map(|f| {
            [
                f.bc.name().to_string(),
                f.source.name().to_string(),
                fmt_float(f.fit.slope),
                fmt_float(f.fit.intercept),
                fmt_float(f.fit.r_squared),
                fmt_float(f.fit.max_residual),
            ]
        }),
    )
}

/// Temperature against acceleration per bc, with the fitted lines evaluated on the grid.
pub fn temperature_curves_csv(out: &SweepOutcome) -> String {
    let fit_at = |bc: BoundaryCondition, source: Source, a: f64| {
        out.fits
            .iter()
            .find(|f| f.bc == bc && f.source == source)
            .map(|f| f.fit.predict(a))
    };
    table(
        &out.config,
        &["bc", "a", "t_nonpert", "t_boltz", "t_fit_np", "t_fit_pt"],
        out.rows.iter().map(|r| {
            [
                r.bc.name().to_string(),
                fmt_float(r.acceleration),
                fmt_opt(r.t_nonpert),
                fmt_opt(r.t_boltz),
                fmt_opt(fit_at(r.bc, Source::Np, r.acceleration)),
                fmt_opt(fit_at(r.bc, Source::Pt, r.acceleration)),
            ]
        }),
    )
}

/// Pairwise temperature differences between boundary conditions.
pub fn differences_csv(out: &SweepOutcome) -> String {
    let rows = out.comparisons.iter().flat_map(|c| {
        c.table.pairs.iter().flat_map(move |p| {
            p.differences.iter().map(move |&(a, d)| {
                [
                    c.source.name().to_string(),
                    p.first.name().to_string(),
                    p.second.name().to_string(),
                    fmt_float(a),
                    fmt_float(d),
                    fmt_float(p.slope_ratio),
                ]
            })
        })
    });
    table(
        &out.config,
        &["source", "first", "second", "a", "delta_t", "slope_ratio"],
        rows,
    )
}

/// Position and coupling strength along the worldline on an even proper-time grid.
pub fn trajectory_csv(cfg: &RunConfig) -> Result<String> {
    let w = cfg.worldline(cfg.trajectory_acceleration)?;
    let t = w.half_duration;
    let rows = (0..TRAJECTORY_SAMPLES).map(|i| {
        let tau = -t + 2.0 * t * i as f64 / (TRAJECTORY_SAMPLES - 1) as f64;
        [fmt_float(tau), fmt_float(w.position(tau)), fmt_float(w.switching(tau))]
    });
    Ok(table(cfg, &["tau", "x", "lambda"], rows))
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub sweep: PathBuf,
    pub fits: PathBuf,
    pub temperature_curves: PathBuf,
    pub differences: PathBuf,
    pub trajectory: PathBuf,
    pub sidecar: PathBuf,
}

/// Writes the three figure files: temperature curves, bc differences, sampled worldline.
pub fn emit_plot_data(out: &SweepOutcome, dir: &Path) -> Result<(PathBuf, PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let curves = dir.join("temperature_vs_acceleration.csv");
    let diffs = dir.join("bc_differences.csv");
    let traj = dir.join("trajectory.csv");
    fs::write(&curves, temperature_curves_csv(out))?;
    fs::write(&diffs, differences_csv(out))?;
    fs::write(&traj, trajectory_csv(&out.config)?)?;
    Ok((curves, diffs, traj))
}

/// Writes every data file plus `run.json` (config, timings, failures, fits).
///
/// Timings live only in the sidecar, so the CSV files of identical runs are byte-identical.
pub fn write_outputs(out: &SweepOutcome, dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let sweep = dir.join("sweep.csv");
    let fits = dir.join("fits.csv");
    fs::write(&sweep, sweep_csv(&out.config, &out.rows))?;
    fs::write(&fits, fits_csv(out))?;
    let (temperature_curves, differences, trajectory) = emit_plot_data(out, dir)?;
    let sidecar = dir.join("run.json");
    let json = serde_json::to_string_pretty(out).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&sidecar, json + "\n")?;
    Ok(OutputFiles {
        sweep,
        fits,
        temperature_curves,
        differences,
        trajectory,
        sidecar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> SweepOutcome {
        SweepOutcome {
            config: RunConfig::default(),
            rows: vec![],
            diagnostics: vec![],
            failures: vec![],
            fits: vec![],
            comparisons: vec![],
        }
    }

    fn row() -> SweepRow {
        SweepRow {
            bc: BoundaryCondition::Neumann,
            coupling: CouplingScheme::Amplitude,
            acceleration: 0.1 + 0.2,
            inside: true,
            nu: Some(1.000_244_517_7),
            r: Some(3.29e-4),
            delta_thermality: Some(4.4e-4),
            energy_above_ground: Some(2.4e-4),
            t_nonpert: Some(0.110_994),
            p_nonpert: Some(1.2e-4),
            p_pert: None,
            t_boltz: None,
            p_pert_matched: None,
            cross_engine_rel: None,
            pt_tail_fraction: None,
            symplectic_residual: Some(2e-13),
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        let x = 1.0 / 3.0;
        assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn sweep_file_round_trips() {
        let cfg = RunConfig::default();
        let rows = vec![row()];
        let text = sweep_csv(&cfg, &rows);
        let (back_cfg, back_rows) = parse_sweep_csv(&text).unwrap();
        assert_eq!(back_cfg, cfg);
        assert_eq!(back_rows, rows);
    }

    #[test]
    fn empty_outcome_gives_header_only_files() {
        let out = empty();
        for text in [
            sweep_csv(&out.config, &out.rows),
            fits_csv(&out),
            temperature_curves_csv(&out),
            differences_csv(&out),
        ] {
            assert_eq!(text.lines().count(), 2);
            assert_eq!(read_config_header(&text).unwrap(), out.config);
        }
    }

    #[test]
    fn trajectory_sampling() {
        let cfg = RunConfig::default();
        let text = trajectory_csv(&cfg).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2 + TRAJECTORY_SAMPLES);
        assert_eq!(lines[1], "tau,x,lambda");
        let first: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        let mid: Vec<f64> = lines[2 + 200].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first[0], -4.0);
        assert_eq!(mid[0], 0.0);
        assert_eq!(mid[2], 0.01);
        assert!((mid[1] - cfg.cavity_length / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(parse_sweep_csv("a,b\n1,2\n").is_err());
        let mut text = sweep_csv(&RunConfig::default(), &[row()]);
        text.push_str("neumann,xx,1\n");
        assert!(parse_sweep_csv(&text).is_err());
    }

    #[test]
    fn written_files_exist() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_outputs(&empty(), dir.path()).unwrap();
        for p in [
            &files.sweep,
            &files.fits,
            &files.temperature_curves,
            &files.differences,
            &files.trajectory,
            &files.sidecar,
        ] {
            assert!(p.exists(), "{}", p.display());
        }
    }
}
