//! Dense reference propagators built from the mode functions, independent of
//! the engine's coupling tables and rotating frame.

#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use unruh_cavity::evolution::InteractionModel;
use unruh_cavity::modes::mode_function;
use unruh_cavity::{BoundaryCondition, CouplingScheme, ModeSet, Worldline};

/// Plain parameters of a small instance.
#[derive(Debug, Clone, Copy)]
pub struct Instance {
    pub bc: BoundaryCondition,
    pub n_modes: usize,
    pub acceleration: f64,
    pub length: f64,
    pub half_duration: f64,
    pub width: f64,
    pub lambda0: f64,
    pub gap: f64,
}

impl Instance {
    pub fn default_box(bc: BoundaryCondition, n_modes: usize, acceleration: f64) -> Self {
        Self {
            bc,
            n_modes,
            acceleration,
            length: 144.0 * PI,
            half_duration: 4.0,
            width: 8.0 / 7.0,
            lambda0: 0.01,
            gap: 1.0,
        }
    }

    /// Short cavity with strong coupling, so the interaction visibly mixes modes.
    pub fn strong(bc: BoundaryCondition, n_modes: usize, acceleration: f64) -> Self {
        Self {
            length: 4.0 * PI,
            lambda0: 0.4,
            ..Self::default_box(bc, n_modes, acceleration)
        }
    }

    pub fn model(&self) -> InteractionModel {
        let w = Worldline::new(
            self.acceleration,
            self.length,
            self.half_duration,
            self.width,
            self.lambda0,
            self.gap,
        )
        .unwrap();
        let modes = ModeSet::new(self.bc, self.length, self.n_modes).unwrap();
        InteractionModel::new(modes, CouplingScheme::Amplitude, w).unwrap()
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes + 2
    }

    /// Mode labels in the engine's slot order.
    pub fn labels(&self) -> Vec<i64> {
        match self.bc {
            BoundaryCondition::Periodic => (0..self.n_modes as i64)
                .map(|i| if i % 2 == 0 { i / 2 + 1 } else { -(i / 2 + 1) })
                .collect(),
            _ => (1..=self.n_modes as i64).collect(),
        }
    }

    fn frequency(&self, label: i64) -> f64 {
        match self.bc {
            BoundaryCondition::Periodic => 2.0 * PI * label.abs() as f64 / self.length,
            _ => PI * label as f64 / self.length,
        }
    }

    fn position(&self, tau: f64) -> f64 {
        let a = self.acceleration;
        0.5 * self.length + ((a * tau).cosh() - 1.0) / a
    }

    fn switching(&self, tau: f64) -> f64 {
        self.lambda0 * (-0.5 * tau * tau / (self.width * self.width)).exp()
    }

    /// Hamiltonian matrix `H` of `H = r^T H r / 2`, split into free and interaction parts.
    pub fn hamiltonian(&self, tau: f64, with_free: bool, with_interaction: bool) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        let blue = (self.acceleration * tau).cosh();
        if with_free {
            h[(0, 0)] = self.gap;
            h[(1, 1)] = self.gap;
        }
        let x = self.position(tau);
        let lam = self.switching(tau);
        for (i, &label) in self.labels().iter().enumerate() {
            let (q, p) = (2 * i + 2, 2 * i + 3);
            if with_free {
                let w = self.frequency(label) * blue;
                h[(q, q)] = w;
                h[(p, p)] = w;
            }
            if with_interaction {
                // mu = sqrt2 q_d, phi = sqrt2 (Re u q - Im u p)
                let u = mode_function(self.bc, label, self.length, x, 0.0).unwrap();
                let cq = lam * SQRT_2 * SQRT_2 * u.re;
                let cp = -lam * SQRT_2 * SQRT_2 * u.im;
                h[(0, q)] = cq;
                h[(q, 0)] = cq;
                h[(0, p)] = cp;
                h[(p, 0)] = cp;
            }
        }
        h
    }

    pub fn generator(&self, tau: f64, with_free: bool, with_interaction: bool) -> DMatrix<f64> {
        symplectic_form(self.dim()) * self.hamiltonian(tau, with_free, with_interaction)
    }
}

pub fn symplectic_form(d: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(d, d);
    for b in (0..d).step_by(2) {
        om[(b, b + 1)] = 1.0;
        om[(b + 1, b)] = -1.0;
    }
    om
}

/// Classical fixed-step RK4 for `dS/dtau = K(tau) S` with `S(t0) = I`.
pub fn rk4_propagator<K: Fn(f64) -> DMatrix<f64>>(k: K, t0: f64, t1: f64, steps: usize) -> DMatrix<f64> {
    let d = k(t0).nrows();
    let h = (t1 - t0) / steps as f64;
    let mut s = DMatrix::<f64>::identity(d, d);
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let k1 = k(t) * &s;
        let k2 = k(t + 0.5 * h) * (&s + &k1 * (0.5 * h));
        let k3 = k(t + 0.5 * h) * (&s + &k2 * (0.5 * h));
        let k4 = k(t + h) * (&s + &k3 * h);
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    s
}

/// Full `S(T)` of an instance by dense integration over `[-T, T]`.
pub fn dense_propagator(inst: &Instance, steps: usize) -> DMatrix<f64> {
    let t = inst.half_duration;
    rk4_propagator(|tau| inst.generator(tau, true, true), -t, t, steps)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().fold(0.0, |m, x| m.max(x.abs()))
}
