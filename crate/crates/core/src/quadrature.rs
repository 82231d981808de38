//! Gauss-Kronrod quadrature of complex oscillatory integrands.
//!
//! Panels are cut so that the accumulated phase `int rate(t) dt` over each
//! panel stays below a fixed budget; every panel is then integrated with the
//! 7/15-point Gauss-Kronrod pair, bisecting where the pair disagrees.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Kronrod abscissae on `[-1, 1]`, descending, centre last.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights at the odd Kronrod abscissae `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// A quadrature node with its Kronrod weight and (possibly zero) Gauss weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub kronrod: f64,
    pub gauss: f64,
}

/// The 15 Gauss-Kronrod nodes mapped onto `[a, b]`, weights scaled by the half-width.
pub fn gk15_nodes(a: f64, b: f64) -> [Node; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [Node {
        x: c,
        kronrod: WGK[7] * h,
        gauss: WG[3] * h,
    }; 15];
    for j in 0..7 {
        let gauss = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
        let node = |x| Node {
            x,
            kronrod: WGK[j] * h,
            gauss,
        };
        out[2 * j] = node(c - h * XGK[j]);
        out[2 * j + 1] = node(c + h * XGK[j]);
    }
    out
}

/// Kronrod value and `|K - G|` error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

pub fn gk15<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64) -> Estimate {
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    for n in gk15_nodes(a, b) {
        let v = f(n.x);
        k += v * n.kronrod;
        g += v * n.gauss;
    }
    Estimate {
        value: k,
        error: (k - g).norm(),
    }
}

/// Splits `[a, b]` into panels carrying at most `budget` radians of phase.
///
/// `rate` is the local phase velocity; each step uses the larger of its
/// values at the two panel ends, which is exact for rates monotone over a panel.
pub fn oscillation_panels<R: Fn(f64) -> f64>(a: f64, b: f64, rate: R, budget: f64) -> Result<Vec<(f64, f64)>> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter {
            name: "interval",
            value: b - a,
            reason: "needs finite a < b",
        });
    }
    if !(budget > 0.0) {
        return Err(Error::InvalidParameter {
            name: "phase_budget",
            value: budget,
            reason: "must be positive",
        });
    }
    let width = b - a;
    let mut panels = Vec::new();
    let mut lo = a;
    while lo < b {
        let r0 = rate(lo).abs();
        let guess = if r0 > 0.0 { budget / r0 } else { width };
        let hi_guess = (lo + guess).min(b);
        let r = r0.max(rate(hi_guess).abs());
        let h = if r > 0.0 { budget / r } else { width };
        let hi = if lo + h >= b || b - (lo + h) < 1e-12 * width {
            b
        } else {
            lo + h
        };
        panels.push((lo, hi));
        lo = hi;
    }
    Ok(panels)
}

/// Adaptive integration of `f` over `[a, b]` on oscillation-aware panels.
///
/// Panels whose estimate exceeds their share of `abs_tol` are bisected up to
/// `max_depth` times.
pub fn integrate_oscillatory<F, R>(
    mut f: F,
    a: f64,
    b: f64,
    rate: R,
    budget: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<Estimate>
where
    F: FnMut(f64) -> Complex64,
    R: Fn(f64) -> f64,
{
    let panels = oscillation_panels(a, b, rate, budget)?;
    let width = b - a;
    let mut total = Estimate {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
    };
    let mut stack: Vec<(f64, f64, u32)> = panels.into_iter().rev().map(|(l, h)| (l, h, 0)).collect();
    while let Some((l, h, depth)) = stack.pop() {
        let est = gk15(&mut f, l, h);
        let share = abs_tol * (h - l) / width;
        if est.error <= share || depth >= max_depth {
            total.value += est.value;
            total.error += est.error;
        } else {
            let m = 0.5 * (l + h);
            stack.push((m, h, depth + 1));
            stack.push((l, m, depth + 1));
        }
    }
    if !(total.error <= abs_tol) {
        return Err(Error::QuadratureNonConvergence {
            estimate: total.error,
            target: abs_tol,
        });
    }
    Ok(total)
}
