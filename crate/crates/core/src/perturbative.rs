//! First-order transition amplitudes of the detector and the resulting
//! excitation probability and Boltzmann temperature.
//!
//! The amplitude to excite the detector together with field mode `n` is
//! `A_n = int lambda(tau) e^{i Omega tau} e^{i omega_n t(tau)} v_n(x(tau))^* dtau`
//! where `v_n = (f_n - i g_n) / sqrt2` is built from the same quadrature
//! couplings that drive the non-perturbative engine.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::InteractionModel;
use crate::modes::{coupling_weight, profile_from_trig, spatial_profile, BoundaryCondition, Mode};
use crate::quadrature::{gk15_nodes, integrate_oscillatory, oscillation_panels};
use crate::trajectory::Worldline;

/// Quadrature controls for the amplitude integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Allowed Gauss-Kronrod discrepancy relative to the mode's envelope bound.
    pub tol: f64,
    /// Phase carried by one panel at the fastest oscillation, in radians.
    pub phase_budget: f64,
    /// Number of times the panel width may be halved before giving up.
    pub max_refinements: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            phase_budget: FRAC_PI_2,
            max_refinements: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeRecord {
    pub label: i64,
    /// Direction of travel for ring modes, `+1` or `-1`.
    pub branch: Option<i8>,
    pub amplitude: Complex64,
    pub probability: f64,
    /// Accumulated Gauss-Kronrod discrepancy.
    pub error: f64,
}

impl AmplitudeRecord {
    fn new(bc: BoundaryCondition, label: i64, amplitude: Complex64, error: f64) -> Self {
        Self {
            label,
            branch: (bc == BoundaryCondition::Periodic).then_some(if label > 0 { 1 } else { -1 }),
            amplitude,
            probability: amplitude.norm_sqr(),
            error,
        }
    }
}

/// Upper bound on `|A_n|`: `|v_n| <= 1/sqrt(omega_n L)` and the Gaussian integrates to `lambda0 delta sqrt(2 pi)`.
fn envelope_bound(w: &Worldline, omega: f64, length: f64) -> f64 {
    w.peak_coupling * w.switching_width * (2.0 * PI).sqrt() / (omega * length).sqrt()
}

/// Phase velocity used to cut panels: `Omega + 2 omega cosh(a tau)`.
fn phase_rate(w: &Worldline, omega: f64) -> impl Fn(f64) -> f64 + '_ {
    move |tau| w.detector_gap + 2.0 * omega * w.redshift(tau)
}

/// Amplitude of a single kept mode, integrated on its own panels.
pub fn first_order_amplitude(
    model: &InteractionModel,
    slot: usize,
    settings: &QuadratureSettings,
) -> Result<AmplitudeRecord> {
    let modes = model.modes();
    let mode = *modes.modes().get(slot).ok_or(Error::InvalidMode {
        label: slot as i64,
        bc: modes.bc().name(),
    })?;
    let w = model.worldline();
    let (bc, length, scheme) = (modes.bc(), modes.length(), model.scheme());
    let weight = coupling_weight(scheme, &mode) * FRAC_1_SQRT_2;
    let integrand = |tau: f64| {
        let (f, g) = spatial_profile(scheme, bc, &mode, length, w.position(tau));
        let phase = w.detector_gap * tau + mode.frequency * w.coordinate_time(tau);
        Complex64::from_polar(w.switching(tau), phase) * Complex64::new(f, g) * weight
    };
    if w.peak_coupling == 0.0 {
        return Ok(AmplitudeRecord::new(bc, mode.label, Complex64::new(0.0, 0.0), 0.0));
    }
    let t = w.half_duration;
    let target = settings.tol * envelope_bound(w, mode.frequency, length);
    let est = integrate_oscillatory(
        integrand,
        -t,
        t,
        phase_rate(w, mode.frequency),
        settings.phase_budget,
        target,
        settings.max_refinements,
    )?;
    Ok(AmplitudeRecord::new(bc, mode.label, est.value, est.error))
}

/// Amplitudes of every kept mode on a shared set of panels.
///
/// Mode phases `e^{i k_n x}` and `e^{i omega_n t}` are generated by powers of
/// the fundamental, so each node costs a few multiplications per mode.
pub fn amplitudes(model: &InteractionModel, settings: &QuadratureSettings) -> Result<Vec<AmplitudeRecord>> {
    let modes = model.modes();
    let (bc, length, scheme) = (modes.bc(), modes.length(), model.scheme());
    let w = model.worldline();
    if w.peak_coupling == 0.0 {
        return Ok(modes
            .modes()
            .iter()
            .map(|m| AmplitudeRecord::new(bc, m.label, Complex64::new(0.0, 0.0), 0.0))
            .collect());
    }
    let fundamental = Mode {
        label: 1,
        wavenumber: crate::modes::wavenumber(bc, 1, length)?,
        frequency: crate::modes::mode_frequency(bc, 1, length)?,
    };
    // (f, g) is linear in (sin kx, cos kx); cache the 2x2 map per mode
    let maps: Vec<[f64; 4]> = modes
        .modes()
        .iter()
        .map(|m| {
            let wgt = coupling_weight(scheme, m) * FRAC_1_SQRT_2;
            let (fs, gs) = profile_from_trig(scheme, bc, m, length, 1.0, 0.0);
            let (fc, gc) = profile_from_trig(scheme, bc, m, length, 0.0, 1.0);
            [wgt * fs, wgt * fc, wgt * gs, wgt * gc]
        })
        .collect();
    let targets: Vec<f64> = modes
        .modes()
        .iter()
        .map(|m| settings.tol * envelope_bound(w, m.frequency, length))
        .collect();

    let t = w.half_duration;
    let mut budget = settings.phase_budget;
    for _ in 0..=settings.max_refinements {
        let panels = oscillation_panels(-t, t, phase_rate(w, modes.max_frequency()), budget)?;
        let (values, errors) = shared_panel_sums(model, &fundamental, &maps, &panels);
        let worst = errors.iter().zip(&targets).map(|(e, t)| e / t).fold(0.0, f64::max);
        if worst <= 1.0 {
            return Ok(modes
                .modes()
                .iter()
                .zip(values.into_iter().zip(errors))
                .map(|(m, (v, e))| AmplitudeRecord::new(bc, m.label, v, e))
                .collect());
        }
        budget *= 0.5;
        if budget < 1e-6 * settings.phase_budget {
            break;
        }
        if worst.is_nan() {
            return Err(Error::QuadratureNonConvergence {
                estimate: f64::NAN,
                target: settings.tol,
            });
        }
    }
    Err(Error::QuadratureNonConvergence {
        estimate: budget,
        target: settings.tol,
    })
}

fn shared_panel_sums(
    model: &InteractionModel,
    fundamental: &Mode,
    maps: &[[f64; 4]],
    panels: &[(f64, f64)],
) -> (Vec<Complex64>, Vec<f64>) {
    let w = model.worldline();
    let modes = model.modes().modes();
    let n = modes.len();
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut errors = vec![0.0; n];
    let mut kron = vec![Complex64::new(0.0, 0.0); n];
    let mut gauss = vec![Complex64::new(0.0, 0.0); n];
    for &(lo, hi) in panels {
        kron.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        gauss.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for node in gk15_nodes(lo, hi) {
            let tau = node.x;
            let base = Complex64::from_polar(w.switching(tau), w.detector_gap * tau);
            let zx = Complex64::from_polar(1.0, fundamental.wavenumber * w.position(tau));
            let zt = Complex64::from_polar(1.0, fundamental.frequency * w.coordinate_time(tau));
            let (mut px, mut pt) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
            let mut power = 0;
            for (i, m) in modes.iter().enumerate() {
                let order = m.label.unsigned_abs();
                while power < order {
                    px *= zx;
                    pt *= zt;
                    power += 1;
                }
                let (s, c) = if m.label > 0 { (px.im, px.re) } else { (-px.im, px.re) };
                let map = &maps[i];
                let f = map[0] * s + map[1] * c;
                let g = map[2] * s + map[3] * c;
                let v = base * pt * Complex64::new(f, g);
                kron[i] += v * node.kronrod;
                gauss[i] += v * node.gauss;
            }
        }
        for i in 0..n {
            values[i] += kron[i];
            errors[i] += (kron[i] - gauss[i]).norm();
        }
    }
    (values, errors)
}

/// `P = sum_n |A_n|^2` over the records given.
pub fn excitation_probability(records: &[AmplitudeRecord]) -> f64 {
    records.iter().map(|r| r.probability).sum()
}

/// Running sums of `|A_n|^2`; non-decreasing by construction.
pub fn partial_sums(records: &[AmplitudeRecord]) -> Vec<f64> {
    records
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r.probability;
            Some(*acc)
        })
        .collect()
}

/// Share of the full sum carried by the second half of the modes.
pub fn tail_fraction(records: &[AmplitudeRecord]) -> f64 {
    let total = excitation_probability(records);
    if total == 0.0 {
        return 0.0;
    }
    excitation_probability(&records[records.len() / 2..]) / total
}

/// Ring-mode amplitude in light-cone form.
///
/// Along the worldline `omega t - k x` reduces, up to a constant, to
/// `-(2 pi n eps / (L a)) e^{-eps a tau}` with `eps = sign(label)`, so only
/// the Gaussian and this phase remain under the integral.
pub fn lightcone_amplitude(w: &Worldline, length: f64, label: i64, settings: &QuadratureSettings) -> Result<Complex64> {
    if label == 0 {
        return Err(Error::InvalidMode { label, bc: "periodic" });
    }
    let eps = label.signum() as f64;
    let m = label.unsigned_abs() as f64;
    let a = w.acceleration;
    let coef = 2.0 * PI * m * eps / (length * a);
    let integrand = |tau: f64| {
        let phase = w.detector_gap * tau - coef * (-eps * a * tau).exp();
        Complex64::from_polar(w.switching(tau), phase)
    };
    let omega = 2.0 * PI * m / length;
    let t = w.half_duration;
    let target = settings.tol * envelope_bound(w, omega, length);
    let est = integrate_oscillatory(
        integrand,
        -t,
        t,
        phase_rate(w, omega),
        settings.phase_budget,
        target * (4.0 * PI * m).sqrt(),
        settings.max_refinements,
    )?;
    Ok(est.value / (4.0 * PI * m).sqrt())
}

/// `T = Omega / ln((1 - P) / P)`, the two-level Boltzmann inversion.
pub fn boltzmann_temperature(p: f64, gap: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(gap / ((1.0 - p) / p).ln())
}
