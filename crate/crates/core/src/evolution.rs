//! Non-perturbative evolution of the detector + field covariance.
//!
//! The generator `Omega F^sym(tau)` splits into a free part `K0` (independent
//! rotations of the detector and of every blueshifted mode) and an interaction
//! part `K1(tau)` that only couples the detector pair to the field. `K0` is
//! solved in closed form; what remains is integrated in the rotating frame,
//! where `K1^I = S0^{-1} K1 S0` has rank two.
//!
//! Conventions: `S(-T) = I`, `S(tau) = S0(tau) S^I(tau)` with `S0` the free
//! rotation referenced to `tau = 0`, hence `S^I(-T) = S0(-T)^{-1}`.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::gaussian::{
    check_symplectic, evolve_covariance, rows_symplectic_residual, vacuum_covariance, CovarianceMatrix, DetectorState,
    SymplecticMatrix,
};
use crate::integrator::{Dop853, IntegrationStats};
use crate::modes::{BoundaryCondition, CouplingScheme, ModeSet};
use crate::trajectory::Worldline;

/// Residual bound, relative to the integration tolerance, that aborts a run.
pub const DRIFT_FACTOR: f64 = 1e3;

/// Detector, field truncation, coupling form and trajectory of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionModel {
    modes: ModeSet,
    scheme: CouplingScheme,
    worldline: Worldline,
}

impl InteractionModel {
    pub fn new(modes: ModeSet, scheme: CouplingScheme, worldline: Worldline) -> Result<Self> {
        scheme.check(modes.bc())?;
        worldline.validate()?;
        Ok(Self {
            modes,
            scheme,
            worldline,
        })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn scheme(&self) -> CouplingScheme {
        self.scheme
    }

    pub fn worldline(&self) -> &Worldline {
        &self.worldline
    }

    pub fn dim(&self) -> usize {
        2 * self.modes.len() + 2
    }

    /// Closed-form `S0(tau)`: detector rotated by `Omega_d tau`, mode `n` by `omega_n t(tau)`.
    pub fn free_symplectic(&self, tau: f64) -> SymplecticMatrix {
        let d = self.dim();
        let mut s = DMatrix::zeros(d, d);
        let t = self.worldline.coordinate_time(tau);
        let mut put = |b: usize, angle: f64| {
            let (sn, cs) = angle.sin_cos();
            s[(b, b)] = cs;
            s[(b, b + 1)] = sn;
            s[(b + 1, b)] = -sn;
            s[(b + 1, b + 1)] = cs;
        };
        put(0, self.worldline.detector_gap * tau);
        for (i, m) in self.modes.modes().iter().enumerate() {
            put(2 * i + 2, m.frequency * t);
        }
        SymplecticMatrix::new(s).expect("square even-dimensional")
    }

    /// Dense `K0(tau) = Omega (F_d^sym + dt/dtau F_f^sym)`.
    pub fn free_generator(&self, tau: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut k = DMatrix::zeros(d, d);
        let blue = self.worldline.redshift(tau);
        let mut put = |b: usize, w: f64| {
            k[(b, b + 1)] = w;
            k[(b + 1, b)] = -w;
        };
        put(0, self.worldline.detector_gap);
        for (i, m) in self.modes.modes().iter().enumerate() {
            put(2 * i + 2, blue * m.frequency);
        }
        k
    }

    /// Couplings `c_m` of `H_I = q_d sum_m c_m x_m` over the field quadratures.
    ///
    /// `c = lambda(tau) sqrt2 (f_n, g_n)`; the `sqrt2` converts the monopole
    /// `a_d + a_d^dag` into `q_d`.
    pub fn coupling_vector(&self, tau: f64, out: &mut [f64]) {
        let x = self.worldline.position(tau);
        self.modes.couplings_into(self.scheme, x, out);
        let scale = SQRT_2 * self.worldline.switching(tau);
        for c in out.iter_mut() {
            *c *= scale;
        }
    }

    /// `K1(tau)` in its sparse detector-row/column form.
    pub fn interaction_generator(&self, tau: f64) -> InteractionGenerator {
        let mut coupling = vec![0.0; 2 * self.modes.len()];
        self.coupling_vector(tau, &mut coupling);
        InteractionGenerator { coupling }
    }

    /// Rotating-frame factors of `K1^I(tau)` written into `frame`.
    fn picture_factors(&self, tau: f64, frame: &mut Frame) {
        self.coupling_vector(tau, &mut frame.b);
        let (sd, cd) = (self.worldline.detector_gap * tau).sin_cos();
        frame.d0 = [cd, sd];
        frame.d1 = [-sd, cd];
        let t = self.worldline.coordinate_time(tau);
        for (m, pair) in self.modes.modes().iter().zip(frame.b.chunks_exact_mut(2)) {
            // R(theta)^T (c_q, c_p)
            let (s, c) = (m.frequency * t).sin_cos();
            let (cq, cp) = (pair[0], pair[1]);
            pair[0] = c * cq - s * cp;
            pair[1] = s * cq + c * cp;
        }
    }

    /// Dense `K1^I(tau) = S0^{-1} K1 S0` assembled from the rank-two factors.
    pub fn interaction_picture_generator(&self, tau: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut frame = Frame::new(self.modes.len());
        self.picture_factors(tau, &mut frame);
        let mut k = DMatrix::zeros(d, d);
        for (m, pair) in frame.b.chunks_exact(2).enumerate() {
            let (q, p) = (2 * m + 2, 2 * m + 3);
            for r in 0..2 {
                k[(r, q)] = -frame.d1[r] * pair[0];
                k[(r, p)] = -frame.d1[r] * pair[1];
                k[(q, r)] = pair[1] * frame.d0[r];
                k[(p, r)] = -pair[0] * frame.d0[r];
            }
        }
        k
    }
}

/// Sparse interaction generator: only the detector rows and columns are nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGenerator {
    /// `c_m` over field quadratures (length `2N`).
    pub coupling: Vec<f64>,
}

impl InteractionGenerator {
    pub fn is_zero(&self) -> bool {
        self.coupling.iter().all(|&c| c == 0.0)
    }

    /// `K1 = Omega F^sym` with `F^sym_{0m} = F^sym_{m0} = c_m`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.coupling.len() + 2;
        let mut k = DMatrix::zeros(d, d);
        for (m, pair) in self.coupling.chunks_exact(2).enumerate() {
            let (q, p) = (2 * m + 2, 2 * m + 3);
            // row 1 of Omega F^sym is -(row 0 of F^sym)
            k[(1, q)] = -pair[0];
            k[(1, p)] = -pair[1];
            // mode rows pick the partner row of F^sym, which is c in column 0
            k[(q, 0)] = pair[1];
            k[(p, 0)] = -pair[0];
        }
        k
    }
}

struct Frame {
    b: Vec<f64>,
    d0: [f64; 2],
    d1: [f64; 2],
}

impl Frame {
    fn new(n_modes: usize) -> Self {
        Self {
            b: vec![0.0; 2 * n_modes],
            d0: [1.0, 0.0],
            d1: [0.0, 1.0],
        }
    }
}

/// Diagnostics attached to every evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub symplectic_residual: f64,
    pub stats: IntegrationStats,
}

/// Full propagator and final state of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub propagator: SymplecticMatrix,
    pub sigma_final: CovarianceMatrix,
    pub diagnostics: Diagnostics,
}

impl EvolutionResult {
    pub fn detector(&self) -> Result<DetectorState> {
        crate::gaussian::reduce_to_detector(&self.sigma_final)
    }
}

/// Detector rows of the propagator and the reduced detector state.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorEvolution {
    /// Rows `0, 1` of `S(T)` (2 x D).
    pub rows: DMatrix<f64>,
    pub detector: DetectorState,
    pub diagnostics: Diagnostics,
}

/// Integrates `dS^I/dtau = K1^I S^I` over `[-T, T]` and returns `S(T)`, `sigma(T)`.
///
/// Each right-hand side costs `O(N D)`: `K1^I X` is two rank-one updates.
pub fn integrate_interaction(model: &InteractionModel, tol: f64) -> Result<EvolutionResult> {
    let d = model.dim();
    let big_t = model.worldline.half_duration;
    let s0_start = model.free_symplectic(-big_t);
    // S^I(-T) = S0(-T)^T; nalgebra storage is column-major
    let mut state: Vec<f64> = s0_start.matrix().transpose().as_slice().to_vec();
    let mut frame = Frame::new(model.modes.len());
    let mut v = vec![0.0; d];
    let mut w = vec![0.0; d];

    let stats = Dop853::new(tol).integrate(
        |tau, x, dx| {
            model.picture_factors(tau, &mut frame);
            let b = &frame.b;
            for j in 0..d {
                let col = &x[j * d..(j + 1) * d];
                let mut acc = 0.0;
                for (bm, xm) in b.iter().zip(&col[2..]) {
                    acc += bm * xm;
                }
                v[j] = acc;
                w[j] = frame.d0[0] * col[0] + frame.d0[1] * col[1];
            }
            for j in 0..d {
                let out = &mut dx[j * d..(j + 1) * d];
                out[0] = -frame.d1[0] * v[j];
                out[1] = -frame.d1[1] * v[j];
                let wj = w[j];
                for (o, pair) in out[2..].chunks_exact_mut(2).zip(b.chunks_exact(2)) {
                    o[0] = pair[1] * wj;
                    o[1] = -pair[0] * wj;
                }
            }
        },
        -big_t,
        big_t,
        &mut state,
    )?;

    let s_int = DMatrix::from_vec(d, d, state);
    let s = SymplecticMatrix::new(model.free_symplectic(big_t).matrix() * s_int)?;
    let residual = check_symplectic(&s);
    check_drift(residual, tol)?;
    let sigma_final = evolve_covariance(&s, &vacuum_covariance(model.modes.len())?)?;
    Ok(EvolutionResult {
        propagator: s,
        sigma_final,
        diagnostics: Diagnostics {
            symplectic_residual: residual,
            stats,
        },
    })
}

/// Computes only the detector rows of `S(T)` by integrating the adjoint
/// equation `dY/dtau = -Y K1^I` backwards from `Y(T) = e_{0,1}`.
///
/// Each right-hand side costs `O(N)`, so large mode counts stay cheap.
pub fn integrate_detector_rows(model: &InteractionModel, tol: f64) -> Result<DetectorEvolution> {
    let d = model.dim();
    let big_t = model.worldline.half_duration;
    let mut state = vec![0.0; 2 * d];
    state[0] = 1.0;
    state[d + 1] = 1.0;
    let mut frame = Frame::new(model.modes.len());

    // s = -tau runs forward; dZ/ds = Z K1^I(-s)
    let stats = Dop853::new(tol).integrate(
        |s, z, dz| {
            model.picture_factors(-s, &mut frame);
            let b = &frame.b;
            for r in 0..2 {
                let row = &z[r * d..(r + 1) * d];
                let out = &mut dz[r * d..(r + 1) * d];
                // y . (J b) over the field block
                let mut yjb = 0.0;
                for (yp, pair) in row[2..].chunks_exact(2).zip(b.chunks_exact(2)) {
                    yjb += yp[0] * pair[1] - yp[1] * pair[0];
                }
                let yd1 = row[0] * frame.d1[0] + row[1] * frame.d1[1];
                out[0] = yjb * frame.d0[0];
                out[1] = yjb * frame.d0[1];
                for (o, bm) in out[2..].iter_mut().zip(b.iter()) {
                    *o = -yd1 * bm;
                }
            }
        },
        -big_t,
        big_t,
        &mut state,
    )?;

    let w_rows = DMatrix::from_row_slice(2, d, &state);
    let (sd, cd) = (model.worldline.detector_gap * big_t).sin_cos();
    let rot_end = Matrix2::new(cd, sd, -sd, cd);
    let mut rows = DMatrix::zeros(2, d);
    for j in 0..d {
        rows[(0, j)] = rot_end[(0, 0)] * w_rows[(0, j)] + rot_end[(0, 1)] * w_rows[(1, j)];
        rows[(1, j)] = rot_end[(1, 0)] * w_rows[(0, j)] + rot_end[(1, 1)] * w_rows[(1, j)];
    }
    // right-multiply by S0(-T)^T, block by block
    let s0_start = model.free_symplectic(-big_t);
    let s0m = s0_start.matrix();
    for blk in (0..d).step_by(2) {
        let (a, b, c, e) = (
            s0m[(blk, blk)],
            s0m[(blk, blk + 1)],
            s0m[(blk + 1, blk)],
            s0m[(blk + 1, blk + 1)],
        );
        for r in 0..2 {
            let (y0, y1) = (rows[(r, blk)], rows[(r, blk + 1)]);
            // [y0 y1] * [[a, c], [b, e]]
            rows[(r, blk)] = y0 * a + y1 * b;
            rows[(r, blk + 1)] = y0 * c + y1 * e;
        }
    }

    let residual = rows_symplectic_residual(&rows, 0);
    check_drift(residual, tol)?;
    let sigma_d = &rows * rows.transpose();
    let block = Matrix2::new(
        sigma_d[(0, 0)],
        0.5 * (sigma_d[(0, 1)] + sigma_d[(1, 0)]),
        0.5 * (sigma_d[(0, 1)] + sigma_d[(1, 0)]),
        sigma_d[(1, 1)],
    );
    Ok(DetectorEvolution {
        rows,
        detector: DetectorState::from_block(block)?,
        diagnostics: Diagnostics {
            symplectic_residual: residual,
            stats,
        },
    })
}

fn check_drift(residual: f64, tol: f64) -> Result<()> {
    let bound = DRIFT_FACTOR * tol;
    if !(residual <= bound) {
        return Err(Error::SymplecticDrift { residual, bound });
    }
    Ok(())
}

/// Base parameters for a mode-count scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSetup {
    pub bc: BoundaryCondition,
    pub scheme: CouplingScheme,
    pub worldline: Worldline,
    pub tol: f64,
}

/// One row of a convergence scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_modes: usize,
    pub nu: f64,
    pub temperature: f64,
    /// Relative temperature change from the previous row.
    pub relative_change: Option<f64>,
    /// Set when the change from the previous row exceeds [`CONVERGENCE_TOL`].
    pub not_converged: bool,
}

/// Relative temperature change above which a scan row is flagged.
pub const CONVERGENCE_TOL: f64 = 1e-3;

/// Detector observables for each mode count in ascending `n_list`.
pub fn mode_convergence_scan(setup: &ScanSetup, n_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if n_list.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Config("mode counts must be strictly ascending".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let modes = ModeSet::new(setup.bc, setup.worldline.cavity_length, n)?;
        let model = InteractionModel::new(modes, setup.scheme, setup.worldline)?;
        let det = integrate_detector_rows(&model, setup.tol)?.detector;
        let temperature = analysis::nonperturbative_temperature(det.nu, setup.worldline.detector_gap);
        let relative_change = rows
            .last()
            .map(|prev| relative_difference(temperature, prev.temperature));
        rows.push(ConvergenceRow {
            n_modes: n,
            nu: det.nu,
            temperature,
            relative_change,
            not_converged: relative_change.is_some_and(|c| c > CONVERGENCE_TOL),
        });
    }
    Ok(rows)
}

fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
