//! Cavity mode spectra, spatial profiles and quadrature couplings.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 3] = [
        BoundaryCondition::Dirichlet,
        BoundaryCondition::Neumann,
        BoundaryCondition::Periodic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Periodic => "periodic",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            "periodic" => Ok(BoundaryCondition::Periodic),
            other => Err(Error::Config(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// How the detector monopole couples to the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CouplingScheme {
    /// Monopole times field amplitude.
    #[serde(rename = "xx")]
    Amplitude,
    /// Monopole times field momentum, with per-mode strength `lambda / omega_n`.
    #[serde(rename = "xp")]
    Momentum,
}

impl CouplingScheme {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingScheme::Amplitude => "xx",
            CouplingScheme::Momentum => "xp",
        }
    }

    pub fn check(&self, bc: BoundaryCondition) -> Result<()> {
        match (self, bc) {
            (CouplingScheme::Momentum, BoundaryCondition::Periodic) | (CouplingScheme::Amplitude, _) => Ok(()),
            (CouplingScheme::Momentum, other) => Err(Error::SchemeMismatch { bc: other.name() }),
        }
    }
}

impl fmt::Display for CouplingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xx" | "amplitude" => Ok(CouplingScheme::Amplitude),
            "xp" | "momentum" => Ok(CouplingScheme::Momentum),
            other => Err(Error::Config(format!("unknown coupling scheme `{other}`"))),
        }
    }
}

/// A single kept cavity mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub label: i64,
    pub wavenumber: f64,
    pub frequency: f64,
}

/// The truncated set of modes kept in a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    bc: BoundaryCondition,
    length: f64,
    modes: Vec<Mode>,
}

impl ModeSet {
    /// Keeps `n` modes. For periodic cavities labels alternate `+1, -1, +2, -2, ...`.
    pub fn new(bc: BoundaryCondition, length: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoModes);
        }
        check_length(length)?;
        let labels: Vec<i64> = match bc {
            BoundaryCondition::Periodic => (0..n)
                .map(|i| {
                    let m = (i / 2 + 1) as i64;
                    if i % 2 == 0 {
                        m
                    } else {
                        -m
                    }
                })
                .collect(),
            _ => (1..=n as i64).collect(),
        };
        let modes = labels
            .into_iter()
            .map(|label| {
                Ok(Mode {
                    label,
                    wavenumber: wavenumber(bc, label, length)?,
                    frequency: mode_frequency(bc, label, length)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bc, length, modes })
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn max_frequency(&self) -> f64 {
        self.modes.iter().map(|m| m.frequency).fold(0.0, f64::max)
    }

    /// Writes `(f_n, g_n)` for every kept mode into `out` (length `2N`), such
    /// that `phi(x) = sum_n f_n q_n + g_n p_n`, including the scheme weight.
    pub fn couplings_into(&self, scheme: CouplingScheme, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), 2 * self.modes.len());
        let len = self.length;
        for (m, pair) in self.modes.iter().zip(out.chunks_exact_mut(2)) {
            let (f, g) = couplings_for(scheme, self.bc, m, len, x);
            pair[0] = f;
            pair[1] = g;
        }
    }
}

/// `k_n`: `n pi / L` for mirrors, `2 n pi / L` (signed) for the ring.
pub fn wavenumber(bc: BoundaryCondition, n: i64, length: f64) -> Result<f64> {
    check_label(bc, n)?;
    check_length(length)?;
    Ok(match bc {
        BoundaryCondition::Periodic => 2.0 * n as f64 * PI / length,
        _ => n as f64 * PI / length,
    })
}

/// `omega_n = |k_n| c`.
pub fn mode_frequency(bc: BoundaryCondition, n: i64, length: f64) -> Result<f64> {
    Ok(wavenumber(bc, n, length)?.abs() * SPEED_OF_LIGHT)
}

/// Klein-Gordon normalized mode function `u_n(x, t)`.
///
/// The formulas are evaluated unchanged outside `[0, L]`.
pub fn mode_function(bc: BoundaryCondition, n: i64, length: f64, x: f64, t: f64) -> Result<Complex64> {
    let k = wavenumber(bc, n, length)?;
    let omega = k.abs() * SPEED_OF_LIGHT;
    let time = Complex64::from_polar(1.0, -omega * t);
    Ok(match bc {
        BoundaryCondition::Dirichlet => time * (k * x).sin() / (k * length).sqrt(),
        BoundaryCondition::Neumann => time * (k * x).cos() / (k * length).sqrt(),
        BoundaryCondition::Periodic => {
            Complex64::from_polar(1.0, -(omega * t - k * x)) / (2.0 * k.abs() * length).sqrt()
        }
    })
}

/// `(f_n, g_n)` at lab position `x` for unit coupling strength.
pub fn quadrature_couplings(
    scheme: CouplingScheme,
    bc: BoundaryCondition,
    n: i64,
    length: f64,
    x: f64,
) -> Result<(f64, f64)> {
    scheme.check(bc)?;
    let mode = Mode {
        label: n,
        wavenumber: wavenumber(bc, n, length)?,
        frequency: mode_frequency(bc, n, length)?,
    };
    Ok(couplings_for(scheme, bc, &mode, length, x))
}

/// Per-mode strength multiplying `lambda(tau)`.
pub fn coupling_weight(scheme: CouplingScheme, mode: &Mode) -> f64 {
    match scheme {
        CouplingScheme::Amplitude => 1.0,
        CouplingScheme::Momentum => 1.0 / mode.frequency,
    }
}

/// Spatial profile before the scheme weight.
///
/// Amplitude: `f = sqrt2 Re u_n(x, 0)`, `g = -sqrt2 Im u_n(x, 0)`. Momentum
/// applies the same split to `i sqrt(omega / 2L) e^{ikx}`.
pub fn spatial_profile(scheme: CouplingScheme, bc: BoundaryCondition, mode: &Mode, length: f64, x: f64) -> (f64, f64) {
    let (s, c) = (mode.wavenumber * x).sin_cos();
    profile_from_trig(scheme, bc, mode, length, s, c)
}

/// [`spatial_profile`] given `sin(k x)` and `cos(k x)`.
pub fn profile_from_trig(
    scheme: CouplingScheme,
    bc: BoundaryCondition,
    mode: &Mode,
    length: f64,
    s: f64,
    c: f64,
) -> (f64, f64) {
    let k = mode.wavenumber;
    match (scheme, bc) {
        (CouplingScheme::Amplitude, BoundaryCondition::Dirichlet) => ((2.0 / (k * length)).sqrt() * s, 0.0),
        (CouplingScheme::Amplitude, BoundaryCondition::Neumann) => ((2.0 / (k * length)).sqrt() * c, 0.0),
        (CouplingScheme::Amplitude, BoundaryCondition::Periodic) => {
            let norm = 1.0 / (k.abs() * length).sqrt();
            (norm * c, -norm * s)
        }
        (CouplingScheme::Momentum, _) => {
            let norm = (mode.frequency / length).sqrt();
            (-norm * s, -norm * c)
        }
    }
}

fn couplings_for(scheme: CouplingScheme, bc: BoundaryCondition, mode: &Mode, length: f64, x: f64) -> (f64, f64) {
    let (f, g) = spatial_profile(scheme, bc, mode, length, x);
    let w = coupling_weight(scheme, mode);
    (w * f, w * g)
}

fn check_label(bc: BoundaryCondition, n: i64) -> Result<()> {
    let ok = match bc {
        BoundaryCondition::Periodic => n != 0,
        _ => n > 0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidMode {
            label: n,
            bc: bc.name(),
        })
    }
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "cavity_length",
            value: length,
            reason: "must be finite and positive",
        })
    }
}
