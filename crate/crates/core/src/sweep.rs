//! Acceleration sweeps across boundary conditions, fits, and cross-condition comparisons.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{compare_boundary_conditions, fit_temperature_curve, thermality, ComparisonTable, SweepFit};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evolution::{integrate_detector_rows, integrate_interaction, InteractionModel};
use crate::integrator::IntegrationStats;
use crate::modes::{BoundaryCondition, CouplingScheme, ModeSet};
use crate::perturbative::{
    amplitudes, boltzmann_temperature, excitation_probability, tail_fraction, QuadratureSettings,
};

/// One `(bc, a)` row of a sweep. Engines that did not run leave their fields empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub bc: BoundaryCondition,
    pub coupling: CouplingScheme,
    pub acceleration: f64,
    /// Whether the worldline stays within the cavity for the whole window.
    pub inside: bool,
    pub nu: Option<f64>,
    pub r: Option<f64>,
    pub delta_thermality: Option<f64>,
    pub energy_above_ground: Option<f64>,
    pub t_nonpert: Option<f64>,
    pub p_nonpert: Option<f64>,
    pub p_pert: Option<f64>,
    pub t_boltz: Option<f64>,
    /// Perturbative probability with the non-perturbative mode count.
    pub p_pert_matched: Option<f64>,
    /// `|p_nonpert - p_pert_matched|` relative to the larger of the two.
    pub cross_engine_rel: Option<f64>,
    pub pt_tail_fraction: Option<f64>,
    pub symplectic_residual: Option<f64>,
}

/// Run-time details kept out of the data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub bc: BoundaryCondition,
    pub acceleration: f64,
    pub wall_seconds: f64,
    pub np_stats: Option<IntegrationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub bc: BoundaryCondition,
    pub acceleration: f64,
    pub message: String,
}

/// Which temperature a fit is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Np,
    Pt,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Np => "np",
            Source::Pt => "pt",
        }
    }

    fn temperature(self, row: &SweepRow) -> Option<f64> {
        match self {
            Source::Np => row.t_nonpert,
            Source::Pt => row.t_boltz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub bc: BoundaryCondition,
    pub source: Source,
    pub fit: SweepFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceComparison {
    pub source: Source,
    pub table: ComparisonTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub config: RunConfig,
    pub rows: Vec<SweepRow>,
    pub diagnostics: Vec<PointDiagnostics>,
    pub failures: Vec<PointFailure>,
    pub fits: Vec<FitRecord>,
    pub comparisons: Vec<SourceComparison>,
}

/// Runs the configured engines at a single `(bc, a)`.
pub fn run_point(cfg: &RunConfig, bc: BoundaryCondition, acceleration: f64) -> Result<(SweepRow, PointDiagnostics)> {
    let start = Instant::now();
    let w = cfg.worldline(acceleration)?;
    let mut row = SweepRow {
        bc,
        coupling: cfg.coupling,
        acceleration,
        inside: w.stays_inside(),
        nu: None,
        r: None,
        delta_thermality: None,
        energy_above_ground: None,
        t_nonpert: None,
        p_nonpert: None,
        p_pert: None,
        t_boltz: None,
        p_pert_matched: None,
        cross_engine_rel: None,
        pt_tail_fraction: None,
        symplectic_residual: None,
    };
    let mut np_stats = None;
    let quad = QuadratureSettings {
        tol: cfg.pt_tol,
        ..Default::default()
    };
    let model_with = |n: usize| -> Result<InteractionModel> {
        InteractionModel::new(ModeSet::new(bc, cfg.cavity_length, n)?, cfg.coupling, w)
    };

    if cfg.engine.runs_nonperturbative() {
        let model = model_with(cfg.np_modes)?;
        let (state, residual, stats) = if cfg.full_propagator {
            let res = integrate_interaction(&model, cfg.tol)?;
            (
                res.detector()?,
                res.diagnostics.symplectic_residual,
                res.diagnostics.stats,
            )
        } else {
            let res = integrate_detector_rows(&model, cfg.tol)?;
            (res.detector, res.diagnostics.symplectic_residual, res.diagnostics.stats)
        };
        let rep = thermality(&state, cfg.omega_d);
        row.nu = Some(rep.nu);
        row.r = Some(rep.r);
        row.delta_thermality = Some(rep.delta_ratio);
        row.energy_above_ground = Some(rep.energy_above_ground);
        row.t_nonpert = Some(rep.temperature);
        row.p_nonpert = Some(crate::analysis::nonperturbative_excitation(rep.nu));
        row.symplectic_residual = Some(residual);
        np_stats = Some(stats);
    }

    if cfg.engine.runs_perturbative() {
        let recs = amplitudes(&model_with(cfg.pt_modes)?, &quad)?;
        let p = excitation_probability(&recs);
        row.p_pert = Some(p);
        row.pt_tail_fraction = Some(tail_fraction(&recs));
        row.t_boltz = Some(if p == 0.0 {
            0.0
        } else {
            boltzmann_temperature(p, cfg.omega_d)?
        });
    }

    if cfg.engine.runs_nonperturbative() && cfg.engine.runs_perturbative() {
        let matched = if cfg.pt_modes == cfg.np_modes {
            row.p_pert.expect("perturbative engine ran")
        } else {
            excitation_probability(&amplitudes(&model_with(cfg.np_modes)?, &quad)?)
        };
        let pn = row.p_nonpert.expect("non-perturbative engine ran");
        row.p_pert_matched = Some(matched);
        row.cross_engine_rel = Some(if pn == matched {
            0.0
        } else {
            (pn - matched).abs() / pn.abs().max(matched.abs())
        });
    }

    let diag = PointDiagnostics {
        bc,
        acceleration,
        wall_seconds: start.elapsed().as_secs_f64(),
        np_stats,
    };
    Ok((row, diag))
}

/// Every `(bc, a)` of the configuration on a pool of `cfg.workers` threads.
///
/// Results come back in configuration order regardless of completion order;
/// failed points are reported without discarding the others.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let tasks: Vec<(BoundaryCondition, f64)> = cfg
        .bcs
        .iter()
        .flat_map(|&bc| cfg.accelerations.iter().map(move |&a| (bc, a)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<Result<(SweepRow, PointDiagnostics)>> =
        pool.install(|| tasks.par_iter().map(|&(bc, a)| run_point(cfg, bc, a)).collect());

    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    let mut failures = Vec::new();
    for (&(bc, acceleration), res) in tasks.iter().zip(results) {
        match res {
            Ok((row, diag)) => {
                rows.push(row);
                diagnostics.push(diag);
            }
            Err(e) => failures.push(PointFailure {
                bc,
                acceleration,
                message: e.to_string(),
            }),
        }
    }
    let (fits, comparisons) = summarize(cfg, &rows);
    Ok(SweepOutcome {
        config: cfg.clone(),
        rows,
        diagnostics,
        failures,
        fits,
        comparisons,
    })
}

/// Per-bc fits of each available temperature and pairwise comparisons of those fits.
///
/// A curve is fitted only when every configured acceleration produced a value.
pub fn summarize(cfg: &RunConfig, rows: &[SweepRow]) -> (Vec<FitRecord>, Vec<SourceComparison>) {
    let mut fits = Vec::new();
    let mut comparisons = Vec::new();
    for source in [Source::Np, Source::Pt] {
        let mut per_bc = Vec::new();
        for &bc in &cfg.bcs {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.bc == bc)
                .filter_map(|r| source.temperature(r).map(|t| (r.acceleration, t)))
                .collect();
            if points.len() != cfg.accelerations.len() {
                continue;
            }
            if let Ok(fit) = fit_temperature_curve(&points) {
                fits.push(FitRecord {
                    bc,
                    source,
                    fit: fit.clone(),
                });
                per_bc.push((bc, fit));
            }
        }
        if per_bc.len() >= 2 {
            if let Ok(table) = compare_boundary_conditions(&per_bc) {
                comparisons.push(SourceComparison { source, table });
            }
        }
    }
    (fits, comparisons)
}
