//! Uniformly accelerated worldline through the cavity and the Gaussian switching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in natural units.
pub const SPEED_OF_LIGHT: f64 = 1.0;

/// Detector trajectory and coupling profile, parametrized by proper time.
///
/// The detector turns around at the cavity centre at `tau = 0` and the
/// interaction runs over `tau` in `[-T, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Worldline {
    pub acceleration: f64,
    pub cavity_length: f64,
    pub half_duration: f64,
    pub switching_width: f64,
    pub peak_coupling: f64,
    pub detector_gap: f64,
}

impl Worldline {
    pub fn new(
        acceleration: f64,
        cavity_length: f64,
        half_duration: f64,
        switching_width: f64,
        peak_coupling: f64,
        detector_gap: f64,
    ) -> Result<Self> {
        let w = Self {
            acceleration,
            cavity_length,
            half_duration,
            switching_width,
            peak_coupling,
            detector_gap,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        positive("acceleration", self.acceleration)?;
        positive("cavity_length", self.cavity_length)?;
        positive("half_duration", self.half_duration)?;
        positive("switching_width", self.switching_width)?;
        positive("detector_gap", self.detector_gap)?;
        if !(self.peak_coupling >= 0.0) || !self.peak_coupling.is_finite() {
            return Err(Error::InvalidParameter {
                name: "peak_coupling",
                value: self.peak_coupling,
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }

    /// Lab-frame position `L/2 + (c^2/a)(cosh(a tau) - 1)`.
    pub fn position(&self, tau: f64) -> f64 {
        let a = self.acceleration;
        let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
        // cosh(y) - 1 = 2 sinh^2(y/2) avoids cancellation as a -> 0
        let half = 0.5 * a * tau / SPEED_OF_LIGHT;
        0.5 * self.cavity_length + 2.0 * c2 / a * half.sinh().powi(2)
    }

    /// Lab time `(c/a) sinh(a tau)`.
    pub fn coordinate_time(&self, tau: f64) -> f64 {
        let a = self.acceleration;
        SPEED_OF_LIGHT / a * (a * tau / SPEED_OF_LIGHT).sinh()
    }

    /// Blueshift factor `dt/dtau = cosh(a tau)`.
    pub fn redshift(&self, tau: f64) -> f64 {
        (self.acceleration * tau / SPEED_OF_LIGHT).cosh()
    }

    /// Coupling strength `lambda_0 exp(-tau^2 / (2 delta^2))`.
    pub fn switching(&self, tau: f64) -> f64 {
        let d = self.switching_width;
        self.peak_coupling * (-tau * tau / (2.0 * d * d)).exp()
    }

    /// Whether the worldline stays inside `[0, L]` over the interaction window.
    pub fn stays_inside(&self) -> bool {
        self.position(self.half_duration) <= self.cavity_length
    }

    /// Copy with a different acceleration.
    pub fn with_acceleration(&self, acceleration: f64) -> Result<Self> {
        let mut w = *self;
        w.acceleration = acceleration;
        w.validate()?;
        Ok(w)
    }

    /// Copy with a different peak coupling.
    pub fn with_coupling(&self, peak_coupling: f64) -> Result<Self> {
        let mut w = *self;
        w.peak_coupling = peak_coupling;
        w.validate()?;
        Ok(w)
    }
}

/// Smallest acceleration whose turning-point excursion reaches the mirror.
///
/// Solves `cosh(a T) - 1 = a L / 2` for the nontrivial root `a > 0`. The
/// left-hand side exceeds the right only beyond this root, so bisection on
/// the sign change is robust.
pub fn exit_threshold(half_duration: f64, cavity_length: f64) -> Result<f64> {
    positive("half_duration", half_duration)?;
    positive("cavity_length", cavity_length)?;
    let excess = |a: f64| {
        let w = Worldline {
            acceleration: a,
            cavity_length,
            half_duration,
            switching_width: 1.0,
            peak_coupling: 0.0,
            detector_gap: 1.0,
        };
        w.position(half_duration) - cavity_length
    };
    // near a = 0 the excursion is a T^2 / 2 < L / 2 for reasonable inputs
    let mut lo = 1e-12;
    if excess(lo) > 0.0 {
        return Err(Error::InvalidParameter {
            name: "half_duration",
            value: half_duration,
            reason: "detector leaves the cavity even without acceleration",
        });
    }
    let mut hi = 1.0;
    while excess(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvalidParameter {
                name: "cavity_length",
                value: cavity_length,
                reason: "no exit threshold found",
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn default_worldline(a: f64) -> Worldline {
        Worldline::new(a, 144.0 * PI, 4.0, 8.0 / 7.0, 0.01, 1.0).unwrap()
    }

    #[test]
    fn turning_point_at_centre() {
        let w = default_worldline(1.6);
        assert_eq!(w.position(0.0), 0.5 * w.cavity_length);
        assert_eq!(w.coordinate_time(0.0), 0.0);
        assert_eq!(w.redshift(0.0), 1.0);
        assert_eq!(w.switching(0.0), 0.01);
    }

    #[test]
    fn endpoint_values() {
        let w = default_worldline(1.6);
        let x = w.position(4.0);
        assert_relative_eq!(x, 72.0 * PI + (6.4f64.cosh() - 1.0) / 1.6, epsilon = 1e-12);
        assert!(x > 413.0 && x < 414.5, "{x}");
        assert!(w.stays_inside());
        assert_relative_eq!(w.coordinate_time(4.0), 6.4f64.sinh() / 1.6, epsilon = 1e-12);
        assert!((w.coordinate_time(4.0) - 188.0).abs() < 0.5);
        assert!((w.redshift(4.0) - 300.92).abs() < 0.01);
        let edge = w.switching(4.0);
        assert_relative_eq!(edge, 0.01 * (-49.0f64 / 8.0).exp(), epsilon = 1e-15);
        assert!((edge - 2.2e-5).abs() < 0.1e-5);
    }

    #[test]
    fn inertial_limit() {
        let w = default_worldline(1e-8);
        assert_relative_eq!(w.coordinate_time(2.5), 2.5, epsilon = 1e-12);
        assert_relative_eq!(w.position(2.5), 0.5 * w.cavity_length + 0.5e-8 * 6.25, epsilon = 1e-12);
    }

    #[test]
    fn redshift_is_time_derivative() {
        let w = default_worldline(1.2);
        let h = 1e-5;
        for &tau in &[-3.1, -0.4, 0.0, 0.9, 2.7] {
            let fd = (w.coordinate_time(tau + h) - w.coordinate_time(tau - h)) / (2.0 * h);
            assert!((fd - w.redshift(tau)).abs() / w.redshift(tau) < 1e-8);
        }
    }

    #[test]
    fn zero_coupling_never_switches_on() {
        let w = default_worldline(1.0).with_coupling(0.0).unwrap();
        assert!((-40..=40).all(|i| w.switching(i as f64 * 0.1) == 0.0));
    }

    #[test]
    fn rejects_non_positive_acceleration() {
        assert!(Worldline::new(0.0, 1.0, 1.0, 1.0, 0.1, 1.0).is_err());
        assert!(Worldline::new(1.0, 1.0, 1.0, 1.0, -0.1, 1.0).is_err());
        assert!(default_worldline(1.0).with_acceleration(-1.0).is_err());
    }

    #[test]
    fn exit_threshold_near_one_point_six_five() {
        let a = exit_threshold(4.0, 144.0 * PI).unwrap();
        assert!((a - 1.655_297_324_458_368).abs() < 1e-12, "{a}");
        assert!(default_worldline(a * 0.999).stays_inside());
        assert!(!default_worldline(a * 1.001).stays_inside());
    }
}
