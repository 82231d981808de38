//! Thermality diagnosis, temperatures, and linear fits of temperature against acceleration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::DetectorState;
use crate::modes::BoundaryCondition;

/// Squeezing-to-mixedness ratio at or below which a state counts as thermal.
pub const THERMALITY_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalityReport {
    pub nu: f64,
    pub r: f64,
    /// `r^2 / (nu - 1)`; infinite for a squeezed pure state.
    pub delta_ratio: f64,
    /// `Omega_d [(nu - 1) + nu r^2 / 2]`, leading order in `r`.
    pub energy_above_ground: f64,
    pub temperature: f64,
    pub thermal: bool,
}

/// Temperature of a thermal state with symplectic eigenvalue `nu`: `Omega / ln(1 + 2/(nu - 1))`.
pub fn nonperturbative_temperature(nu: f64, gap: f64) -> f64 {
    if nu <= 1.0 {
        return 0.0;
    }
    gap / (2.0 / (nu - 1.0)).ln_1p()
}

/// Excitation probability `(nu - 1) / 2` of the detector's mixed part.
pub fn nonperturbative_excitation(nu: f64) -> f64 {
    0.5 * (nu - 1.0)
}

pub fn thermality(state: &DetectorState, gap: f64) -> ThermalityReport {
    thermality_with_threshold(state, gap, THERMALITY_THRESHOLD)
}

pub fn thermality_with_threshold(state: &DetectorState, gap: f64, threshold: f64) -> ThermalityReport {
    let (nu, r) = (state.nu, state.r);
    let excess = nu - 1.0;
    let delta_ratio = if r == 0.0 {
        0.0
    } else if excess <= 0.0 {
        f64::INFINITY
    } else {
        r * r / excess
    };
    ThermalityReport {
        nu,
        r,
        delta_ratio,
        energy_above_ground: gap * (excess + 0.5 * nu * r * r),
        temperature: nonperturbative_temperature(nu, gap),
        thermal: delta_ratio <= threshold,
    }
}

/// Least-squares line through `(a, T)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_residual: f64,
}

impl SweepFit {
    pub fn predict(&self, a: f64) -> f64 {
        self.slope * a + self.intercept
    }
}

/// Unweighted ordinary least squares `T = slope a + intercept`.
pub fn fit_temperature_curve(points: &[(f64, f64)]) -> Result<SweepFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit);
    }
    let n = points.len() as f64;
    let mean_a = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_t = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut saa, mut sat, mut stt) = (0.0, 0.0, 0.0);
    for &(a, t) in points {
        let (da, dt) = (a - mean_a, t - mean_t);
        saa += da * da;
        sat += da * dt;
        stt += dt * dt;
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) || !(saa > 0.0) {
        return Err(Error::DegenerateFit);
    }
    let slope = sat / saa;
    let intercept = mean_t - slope * mean_a;
    let mut ss_res = 0.0;
    let mut max_residual: f64 = 0.0;
    for &(a, t) in points {
        let e = t - (slope * a + intercept);
        ss_res += e * e;
        max_residual = max_residual.max(e.abs());
    }
    // a flat exact line has no variance to explain
    let r_squared = if stt == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / stt).clamp(0.0, 1.0)
    };
    Ok(SweepFit {
        points: points.to_vec(),
        slope,
        intercept,
        r_squared,
        max_residual,
    })
}

/// Pointwise comparison of two temperature curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub first: BoundaryCondition,
    pub second: BoundaryCondition,
    /// `(a, T_first - T_second)` per acceleration.
    pub differences: Vec<(f64, f64)>,
    pub max_relative: f64,
    pub slope_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub pairs: Vec<PairComparison>,
    pub max_relative: f64,
    /// Largest `|slope_ratio - 1|` across pairs.
    pub max_slope_deviation: f64,
}

/// Pairwise differences between fits that share an acceleration grid.
pub fn compare_boundary_conditions(fits: &[(BoundaryCondition, SweepFit)]) -> Result<ComparisonTable> {
    let mut pairs = Vec::new();
    for i in 0..fits.len() {
        for j in i + 1..fits.len() {
            let (b1, f1) = &fits[i];
            let (b2, f2) = &fits[j];
            if f1.points.len() != f2.points.len() || f1.points.iter().zip(&f2.points).any(|(p, q)| p.0 != q.0) {
                return Err(Error::GridMismatch);
            }
            let mut max_relative: f64 = 0.0;
            let differences = f1
                .points
                .iter()
                .zip(&f2.points)
                .map(|(p, q)| {
                    let d = p.1 - q.1;
                    let scale = p.1.abs().max(q.1.abs());
                    if scale > 0.0 {
                        max_relative = max_relative.max(d.abs() / scale);
                    }
                    (p.0, d)
                })
                .collect();
            let slope_ratio = if f1.slope == f2.slope { 1.0 } else { f1.slope / f2.slope };
            pairs.push(PairComparison {
                first: *b1,
                second: *b2,
                differences,
                max_relative,
                slope_ratio,
            });
        }
    }
    let max_relative = pairs.iter().map(|p| p.max_relative).fold(0.0, f64::max);
    let max_slope_deviation = pairs.iter().map(|p| (p.slope_ratio - 1.0).abs()).fold(0.0, f64::max);
    Ok(ComparisonTable {
        pairs,
        max_relative,
        max_slope_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use std::f64::consts::E;

    fn state(nu: f64, r: f64) -> DetectorState {
        let s = Matrix2::new(nu * r.exp(), 0.0, 0.0, nu * (-r).exp());
        DetectorState::from_block(s).unwrap()
    }

    #[test]
    fn vacuum_is_cold_and_thermal() {
        let rep = thermality(&state(1.0, 0.0), 1.0);
        assert_eq!(rep.temperature, 0.0);
        assert_eq!(rep.delta_ratio, 0.0);
        assert!(rep.thermal);
    }

    #[test]
    fn unit_temperature_inversion() {
        let nu = 1.0 + 2.0 / (E - 1.0);
        let rep = thermality(&state(nu, 0.0), 1.0);
        assert!((rep.temperature - 1.0).abs() < 1e-14);
        assert_eq!(rep.delta_ratio, 0.0);
        assert!((nonperturbative_temperature(nu, 2.5) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn squeezed_vacuum_is_not_thermal() {
        let rep = thermality(&state(1.0, 0.3), 1.0);
        assert!(rep.delta_ratio.is_infinite());
        assert!(!rep.thermal);
    }

    #[test]
    fn energy_without_squeezing_is_twice_occupation() {
        let s = state(1.3, 0.0);
        let rep = thermality(&s, 0.7);
        assert!((rep.energy_above_ground - 0.7 * 2.0 * s.mean_occupation()).abs() < 1e-14);
    }

    #[test]
    fn temperature_grows_with_nu() {
        let ts: Vec<f64> = (1..200)
            .map(|i| nonperturbative_temperature(1.0 + 1e-4 * i as f64, 1.0))
            .collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn exact_line_fit() {
        let pts = [(1.0, 2.1), (2.0, 4.1), (3.0, 6.1)];
        let f = fit_temperature_curve(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 0.1).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(f.max_residual < 1e-14);
    }

    #[test]
    fn degenerate_fits_rejected() {
        assert_eq!(
            fit_temperature_curve(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(Error::DegenerateFit)
        );
        assert_eq!(
            fit_temperature_curve(&[(1.0, 1.0), (1.0, 2.0), (2.0, 2.0)]),
            Err(Error::DegenerateFit)
        );
    }

    #[test]
    fn identical_curves_compare_to_zero() {
        let f = fit_temperature_curve(&[(0.1, 0.2), (0.5, 0.3), (0.9, 0.45)]).unwrap();
        let t = compare_boundary_conditions(&[
            (BoundaryCondition::Dirichlet, f.clone()),
            (BoundaryCondition::Neumann, f.clone()),
            (BoundaryCondition::Periodic, f),
        ])
        .unwrap();
        assert_eq!(t.pairs.len(), 3);
        assert_eq!(t.max_relative, 0.0);
        assert_eq!(t.max_slope_deviation, 0.0);
        assert!(t.pairs.iter().all(|p| p.differences.iter().all(|d| d.1 == 0.0)));
    }

    #[test]
    fn grid_mismatch_detected() {
        let f = fit_temperature_curve(&[(0.1, 0.2), (0.5, 0.3), (0.9, 0.45)]).unwrap();
        let g = fit_temperature_curve(&[(0.1, 0.2), (0.6, 0.3), (0.9, 0.45)]).unwrap();
        assert_eq!(
            compare_boundary_conditions(&[(BoundaryCondition::Dirichlet, f), (BoundaryCondition::Neumann, g)]),
            Err(Error::GridMismatch)
        );
    }
}
