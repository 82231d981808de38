use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use unruh_cavity::config::{linspace, resolve, ConfigOverrides};
use unruh_cavity::evolution::{mode_convergence_scan, ScanSetup};
use unruh_cavity::output::{fmt_float, parse_sweep_csv, write_outputs};
use unruh_cavity::sweep::{run_point, run_sweep, summarize};
use unruh_cavity::trajectory::exit_threshold;
use unruh_cavity::{BoundaryCondition, CouplingScheme, Engine, RunConfig};

/// Accelerated oscillator detector in a one-dimensional cavity.
#[derive(Debug, Parser)]
#[command(name = "unruh-cavity", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep accelerations for every configured boundary condition and write data files.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate one boundary condition at one acceleration and print the row as JSON.
    Single {
        #[command(flatten)]
        run: RunArgs,
        /// Acceleration.
        #[arg(short, long)]
        a: f64,
    },
    /// Detector temperature against the number of kept field modes.
    Converge {
        #[command(flatten)]
        run: RunArgs,
        #[arg(short, long)]
        a: f64,
        /// Ascending mode counts.
        #[arg(long, value_delimiter = ',', default_value = "60,120,240,480")]
        modes_list: Vec<usize>,
    },
    /// Fits and boundary-condition differences of an existing sweep file.
    Compare {
        /// A `sweep.csv` written by `sweep`.
        #[arg(long)]
        from: PathBuf,
    },
}

/// Flags layered over the config file, which is layered over the defaults.
#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Boundary conditions (comma separated).
    #[arg(long, value_delimiter = ',')]
    bc: Option<Vec<BoundaryCondition>>,
    /// Coupling scheme: xx (amplitude) or xp (momentum, periodic only).
    #[arg(long)]
    coupling: Option<CouplingScheme>,
    /// Engines to run: np, pt or both.
    #[arg(long)]
    engine: Option<Engine>,
    /// Integration tolerance of the non-perturbative engine.
    #[arg(long)]
    tol: Option<f64>,
    /// Quadrature tolerance of the perturbative engine.
    #[arg(long)]
    pt_tol: Option<f64>,
    /// Field modes kept by the non-perturbative engine.
    #[arg(long)]
    modes: Option<usize>,
    /// Field modes summed by the perturbative engine.
    #[arg(long)]
    pt_modes: Option<usize>,
    /// Cavity length.
    #[arg(long)]
    length: Option<f64>,
    /// Half of the interaction window in proper time.
    #[arg(long)]
    duration: Option<f64>,
    /// Width of the Gaussian switching.
    #[arg(long)]
    width: Option<f64>,
    /// Peak coupling strength.
    #[arg(long)]
    lambda0: Option<f64>,
    /// Detector gap frequency.
    #[arg(long)]
    omega_d: Option<f64>,
    /// Explicit acceleration grid (comma separated).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["a_min", "a_max", "a_count"])]
    accelerations: Option<Vec<f64>>,
    #[arg(long, requires_all = ["a_max", "a_count"])]
    a_min: Option<f64>,
    #[arg(long, requires_all = ["a_min", "a_count"])]
    a_max: Option<f64>,
    #[arg(long, requires_all = ["a_min", "a_max"])]
    a_count: Option<usize>,
    /// Smallest acceleration accepted in the grid.
    #[arg(long)]
    a_floor: Option<f64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
    /// Integrate the whole propagator instead of only the detector rows.
    #[arg(long)]
    full_propagator: bool,
    /// Acceleration of the sampled worldline file.
    #[arg(long)]
    trajectory_a: Option<f64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let accelerations = match (self.a_min, self.a_max, self.a_count) {
            (Some(lo), Some(hi), Some(n)) => Some(linspace(lo, hi, n)),
            _ => self.accelerations.clone(),
        };
        let overrides = ConfigOverrides {
            bcs: self.bc.clone(),
            coupling: self.coupling,
            cavity_length: self.length,
            half_duration: self.duration,
            switching_width: self.width,
            lambda0: self.lambda0,
            omega_d: self.omega_d,
            np_modes: self.modes,
            pt_modes: self.pt_modes,
            tol: self.tol,
            pt_tol: self.pt_tol,
            accelerations,
            min_acceleration: self.a_floor,
            engine: self.engine,
            workers: self.workers,
            full_propagator: self.full_propagator.then_some(true),
            trajectory_acceleration: self.trajectory_a,
        };
        resolve(self.config.as_deref(), &overrides).context("invalid configuration")
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep { run, out } => sweep(&run.resolve()?, &out),
        Command::Single { run, a } => single(&run.resolve()?, a),
        Command::Converge { run, a, modes_list } => converge(&run.resolve()?, a, &modes_list),
        Command::Compare { from } => compare(&from),
    }
}

fn sweep(cfg: &RunConfig, dir: &Path) -> Result<ExitCode> {
    let a_exit = exit_threshold(cfg.half_duration, cfg.cavity_length)?;
    if cfg.accelerations.iter().any(|&a| a > a_exit) {
        eprintln!("note: accelerations above {a_exit:.6} leave the cavity near the window ends");
    }
    let outcome = run_sweep(cfg)?;
    let files = write_outputs(&outcome, dir).with_context(|| format!("writing {}", dir.display()))?;
    for f in &outcome.fits {
        println!(
            "{:<9} {}  slope {}  intercept {}  R^2 {:.6}",
            f.bc.name(),
            f.source.name(),
            fmt_float(f.fit.slope),
            fmt_float(f.fit.intercept),
            f.fit.r_squared
        );
    }
    for c in &outcome.comparisons {
        println!(
            "{} max |dT|/T {:.4e}  max |slope ratio - 1| {:.4e}",
            c.source.name(),
            c.table.max_relative,
            c.table.max_slope_deviation
        );
    }
    println!("wrote {}", files.sweep.display());
    if outcome.failures.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for f in &outcome.failures {
        eprintln!("failed: {} a={}: {}", f.bc, f.acceleration, f.message);
    }
    Ok(ExitCode::from(2))
}

fn single(cfg: &RunConfig, a: f64) -> Result<ExitCode> {
    let [bc] = cfg.bcs[..] else {
        bail!("`single` needs exactly one --bc");
    };
    let (row, diag) = run_point(cfg, bc, a)?;
    let json = serde_json::json!({ "row": row, "diagnostics": diag });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(ExitCode::SUCCESS)
}

fn converge(cfg: &RunConfig, a: f64, modes_list: &[usize]) -> Result<ExitCode> {
    let mut flagged = false;
    println!("bc,n_modes,nu,temperature,relative_change,not_converged");
    for &bc in &cfg.bcs {
        let setup = ScanSetup {
            bc,
            scheme: cfg.coupling,
            worldline: cfg.worldline(a)?,
            tol: cfg.tol,
        };
        for row in mode_convergence_scan(&setup, modes_list)? {
            flagged |= row.not_converged;
            println!(
                "{},{},{},{},{},{}",
                bc,
                row.n_modes,
                fmt_float(row.nu),
                fmt_float(row.temperature),
                row.relative_change.map(fmt_float).unwrap_or_default(),
                row.not_converged
            );
        }
    }
    Ok(if flagged { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn compare(path: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (cfg, rows) = parse_sweep_csv(&text)?;
    let (fits, comparisons) = summarize(&cfg, &rows);
    if fits.is_empty() {
        bail!("no complete temperature curves in {}", path.display());
    }
    for f in &fits {
        println!(
            "{:<9} {} slope {} R^2 {:.6}",
            f.bc.name(),
            f.source.name(),
            fmt_float(f.fit.slope),
            f.fit.r_squared
        );
    }
    for c in &comparisons {
        for p in &c.table.pairs {
            println!(
                "{} {}-{}: max |dT|/T {:.4e}, slope ratio {:.6}",
                c.source.name(),
                p.first,
                p.second,
                p.max_relative,
                p.slope_ratio
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
