//! Run configuration: defaults, TOML files, and command-line overrides.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{BoundaryCondition, CouplingScheme};
use crate::trajectory::Worldline;

/// Which engines a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Np,
    Pt,
    Both,
}

impl Engine {
    pub fn runs_nonperturbative(self) -> bool {
        matches!(self, Engine::Np | Engine::Both)
    }

    pub fn runs_perturbative(self) -> bool {
        matches!(self, Engine::Pt | Engine::Both)
    }

    pub fn name(self) -> &'static str {
        match self {
            Engine::Np => "np",
            Engine::Pt => "pt",
            Engine::Both => "both",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "np" | "nonperturbative" => Ok(Engine::Np),
            "pt" | "perturbative" => Ok(Engine::Pt),
            "both" => Ok(Engine::Both),
            other => Err(Error::Config(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub bcs: Vec<BoundaryCondition>,
    pub coupling: CouplingScheme,
    pub cavity_length: f64,
    pub half_duration: f64,
    pub switching_width: f64,
    pub lambda0: f64,
    pub omega_d: f64,
    pub np_modes: usize,
    pub pt_modes: usize,
    /// Integration tolerance of the non-perturbative engine.
    pub tol: f64,
    /// Gauss-Kronrod tolerance of the perturbative engine.
    pub pt_tol: f64,
    pub accelerations: Vec<f64>,
    /// Smallest acceleration a grid may contain.
    pub min_acceleration: f64,
    pub engine: Engine,
    pub workers: usize,
    /// Integrate the whole propagator instead of only the detector rows.
    pub full_propagator: bool,
    /// Acceleration of the sampled worldline written alongside a sweep.
    pub trajectory_acceleration: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bcs: BoundaryCondition::ALL.to_vec(),
            coupling: CouplingScheme::Amplitude,
            cavity_length: 144.0 * PI,
            half_duration: 4.0,
            switching_width: 8.0 / 7.0,
            lambda0: 0.01,
            omega_d: 1.0,
            np_modes: 240,
            pt_modes: 9000,
            tol: 1e-11,
            pt_tol: 1e-7,
            accelerations: linspace(0.1, 1.8, 12),
            min_acceleration: 0.05,
            engine: Engine::Both,
            workers: 1,
            full_propagator: false,
            trajectory_acceleration: 1.6,
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.bcs.is_empty() {
            return Err(Error::Config("at least one boundary condition is required".into()));
        }
        for (i, bc) in self.bcs.iter().enumerate() {
            if self.bcs[..i].contains(bc) {
                return Err(Error::Config(format!("boundary condition `{bc}` listed twice")));
            }
            self.coupling.check(*bc)?;
        }
        if self.np_modes == 0 || self.pt_modes == 0 {
            return Err(Error::NoModes);
        }
        if !(self.tol > 0.0) || !(self.pt_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.accelerations.is_empty() {
            return Err(Error::Config("acceleration grid is empty".into()));
        }
        if !(self.min_acceleration > 0.0) {
            return Err(Error::Config("min_acceleration must be positive".into()));
        }
        if let Some(&a) = self.accelerations.iter().find(|&&a| !(a >= self.min_acceleration)) {
            return Err(Error::Config(format!(
                "acceleration {a} is below the floor {}",
                self.min_acceleration
            )));
        }
        if self.accelerations.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("acceleration grid must be strictly increasing".into()));
        }
        for &a in self.accelerations.iter().chain([&self.trajectory_acceleration]) {
            self.worldline(a)?;
        }
        Ok(())
    }

    pub fn worldline(&self, acceleration: f64) -> Result<Worldline> {
        Worldline::new(
            acceleration,
            self.cavity_length,
            self.half_duration,
            self.switching_width,
            self.lambda0,
            self.omega_d,
        )
    }
}

/// Optional values layered over a file or the defaults; `None` keeps the lower layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub bcs: Option<Vec<BoundaryCondition>>,
    pub coupling: Option<CouplingScheme>,
    pub cavity_length: Option<f64>,
    pub half_duration: Option<f64>,
    pub switching_width: Option<f64>,
    pub lambda0: Option<f64>,
    pub omega_d: Option<f64>,
    pub np_modes: Option<usize>,
    pub pt_modes: Option<usize>,
    pub tol: Option<f64>,
    pub pt_tol: Option<f64>,
    pub accelerations: Option<Vec<f64>>,
    pub min_acceleration: Option<f64>,
    pub engine: Option<Engine>,
    pub workers: Option<usize>,
    pub full_propagator: Option<bool>,
    pub trajectory_acceleration: Option<f64>,
}

impl ConfigOverrides {
    pub fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig> {
        macro_rules! layer {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        layer!(
            bcs,
            coupling,
            cavity_length,
            half_duration,
            switching_width,
            lambda0,
            omega_d,
            np_modes,
            pt_modes,
            tol,
            pt_tol,
            accelerations,
            min_acceleration,
            engine,
            workers,
            full_propagator,
            trajectory_acceleration
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Defaults, then the optional file, then the overrides.
pub fn resolve(file: Option<&Path>, overrides: &ConfigOverrides) -> Result<RunConfig> {
    let base = match file {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    overrides.apply(base)
}
