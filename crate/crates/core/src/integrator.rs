//! Adaptive Dormand-Prince 8(5,3) integrator over flat `f64` state vectors.
//!
//! Step control follows Hairer's DOP853: the error is the blended 5th/3rd
//! order estimate in the scaled RMS norm with `sk = atol + rtol max(|y|, |y_new|)`.

use crate::error::{Error, Result};

/// Counters collected during one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Step-control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: Option<f64>,
    pub h_init: Option<f64>,
    pub max_steps: usize,
    pub safety: f64,
    /// Lower bound on `h_new / h`.
    pub fac_min: f64,
    /// Upper bound on `h_new / h`.
    pub fac_max: f64,
    pub beta: f64,
}

impl Dop853 {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_max: None,
            h_init: None,
            max_steps: 5_000_000,
            safety: 0.9,
            fac_min: 0.333,
            fac_max: 6.0,
            beta: 0.0,
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = Some(h_max);
        self
    }

    /// Integrates `dy/dt = f(t, y)` from `t0` to `t1 > t0`, overwriting `y`.
    pub fn integrate<F>(&self, mut f: F, t0: f64, t1: f64, y: &mut [f64]) -> Result<IntegrationStats>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                value: self.rtol.min(self.atol),
                reason: "tolerances must be positive",
            });
        }
        if !(t1 > t0) {
            return Err(Error::InvalidParameter {
                name: "t1",
                value: t1,
                reason: "integration interval must be increasing",
            });
        }
        let n = y.len();
        let span = t1 - t0;
        let h_max = self.h_max.unwrap_or(span).min(span);
        let mut ws = Workspace::new(n);
        let mut stats = IntegrationStats::default();

        f(t0, y, &mut ws.k1);
        stats.rhs_evals += 1;
        let mut h = match self.h_init {
            Some(h) => h.min(h_max),
            None => {
                let h = self.initial_step(&mut f, t0, y, h_max, &mut ws);
                stats.rhs_evals += 1;
                h
            }
        };

        let expo1 = 1.0 / 8.0 - self.beta * 0.2;
        let facc1 = 1.0 / self.fac_min;
        let facc2 = 1.0 / self.fac_max;
        let mut facold: f64 = 1e-4;
        let mut last_rejected = false;
        let mut t = t0;
        let mut steps = 0usize;

        loop {
            if steps >= self.max_steps {
                return Err(Error::TooManySteps {
                    t,
                    max_steps: self.max_steps,
                });
            }
            if h.abs() <= 10.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let last = t + 1.01 * h >= t1;
            if last {
                h = t1 - t;
            }
            steps += 1;

            let err = self.attempt(&mut f, t, h, y, &mut ws);
            stats.rhs_evals += 11;

            let fac11 = err.powf(expo1);
            let fac = fac11 / facold.powf(self.beta);
            let fac = facc2.max(facc1.min(fac / self.safety));
            let mut h_new = h / fac;

            if err <= 1.0 {
                facold = err.max(1e-4);
                stats.accepted += 1;
                // ws.k5 holds the new state, ws.k4 the derivative there
                f(t + h, &ws.k5, &mut ws.k4);
                stats.rhs_evals += 1;
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&ws.k5);
                std::mem::swap(&mut ws.k1, &mut ws.k4);
                if last {
                    return Ok(stats);
                }
                if h_new.abs() > h_max {
                    h_new = h_max;
                }
                if last_rejected {
                    h_new = h_new.min(h);
                }
                last_rejected = false;
            } else {
                h_new = h / facc1.min(fac11 / self.safety);
                last_rejected = true;
                stats.rejected += 1;
            }
            h = h_new;
        }
    }

    /// One trial step; leaves the 8th-order solution in `ws.k5` and returns the
    /// scaled error.
    fn attempt<F>(&self, f: &mut F, t: f64, h: f64, y: &[f64], ws: &mut Workspace) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        use tableau::*;
        let Workspace {
            k1,
            k2,
            k3,
            k4,
            k5,
            k6,
            k7,
            k8,
            k9,
            k10,
            ytmp,
        } = ws;

        stage(ytmp, y, h, [A21], [&k1[..]]);
        f(t + C2 * h, ytmp, k2);
        stage(ytmp, y, h, [A31, A32], [&k1[..], &k2[..]]);
        f(t + C3 * h, ytmp, k3);
        stage(ytmp, y, h, [A41, A43], [&k1[..], &k3[..]]);
        f(t + C4 * h, ytmp, k4);
        stage(ytmp, y, h, [A51, A53, A54], [&k1[..], &k3[..], &k4[..]]);
        f(t + C5 * h, ytmp, k5);
        stage(ytmp, y, h, [A61, A64, A65], [&k1[..], &k4[..], &k5[..]]);
        f(t + C6 * h, ytmp, k6);
        stage(ytmp, y, h, [A71, A74, A75, A76], [&k1[..], &k4[..], &k5[..], &k6[..]]);
        f(t + C7 * h, ytmp, k7);
        stage(
            ytmp,
            y,
            h,
            [A81, A84, A85, A86, A87],
            [&k1[..], &k4[..], &k5[..], &k6[..], &k7[..]],
        );
        f(t + C8 * h, ytmp, k8);
        stage(
            ytmp,
            y,
            h,
            [A91, A94, A95, A96, A97, A98],
            [&k1[..], &k4[..], &k5[..], &k6[..], &k7[..], &k8[..]],
        );
        f(t + C9 * h, ytmp, k9);
        stage(
            ytmp,
            y,
            h,
            [A101, A104, A105, A106, A107, A108, A109],
            [&k1[..], &k4[..], &k5[..], &k6[..], &k7[..], &k8[..], &k9[..]],
        );
        f(t + C10 * h, ytmp, k10);
        stage(
            ytmp,
            y,
            h,
            [A111, A114, A115, A116, A117, A118, A119, A1110],
            [&k1[..], &k4[..], &k5[..], &k6[..], &k7[..], &k8[..], &k9[..], &k10[..]],
        );
        // k2 is free from here on and stores stage 11
        f(t + C11 * h, ytmp, k2);
        stage(
            ytmp,
            y,
            h,
            [A121, A124, A125, A126, A127, A128, A129, A1210, A1211],
            [
                &k1[..],
                &k4[..],
                &k5[..],
                &k6[..],
                &k7[..],
                &k8[..],
                &k9[..],
                &k10[..],
                &k2[..],
            ],
        );
        // k3 stores stage 12
        f(t + h, ytmp, k3);

        let n = y.len();
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..n {
            let incr = B1 * k1[i]
                + B6 * k6[i]
                + B7 * k7[i]
                + B8 * k8[i]
                + B9 * k9[i]
                + B10 * k10[i]
                + B11 * k2[i]
                + B12 * k3[i];
            let y_new = y[i] + h * incr;
            let sk = self.atol + self.rtol * y[i].abs().max(y_new.abs());
            let e3 = incr - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k3[i];
            let e5 = ER1 * k1[i]
                + ER6 * k6[i]
                + ER7 * k7[i]
                + ER8 * k8[i]
                + ER9 * k9[i]
                + ER10 * k10[i]
                + ER11 * k2[i]
                + ER12 * k3[i];
            err2 += (e3 / sk).powi(2);
            err += (e5 / sk).powi(2);
            k5[i] = y_new;
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err * (1.0 / (deno * n as f64)).sqrt()
    }

    fn initial_step<F>(&self, f: &mut F, t0: f64, y: &[f64], h_max: f64, ws: &mut Workspace) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len() as f64;
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for (yi, fi) in y.iter().zip(ws.k1.iter()) {
            let sk = self.atol + self.rtol * yi.abs();
            dnf += (fi / sk).powi(2);
            dny += (yi / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(h_max);
        for ((yt, yi), k) in ws.ytmp.iter_mut().zip(y.iter()).zip(&ws.k1) {
            *yt = yi + h * k;
        }
        f(t0 + h, &ws.ytmp, &mut ws.k2);
        let mut der2 = 0.0;
        for ((yi, k2), k1) in y.iter().zip(&ws.k2).zip(&ws.k1) {
            let sk = self.atol + self.rtol * yi.abs();
            der2 += ((k2 - k1) / sk).powi(2);
        }
        let der2 = (der2 / n).sqrt() / h;
        let der12 = der2.abs().max((dnf / n).sqrt());
        let h1 = if der12 <= 1e-15 {
            1e-6f64.max(h.abs() * 1e-3)
        } else {
            (0.01 / der12).powf(1.0 / 8.0)
        };
        (100.0 * h).min(h1).min(h_max)
    }
}

struct Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    k5: Vec<f64>,
    k6: Vec<f64>,
    k7: Vec<f64>,
    k8: Vec<f64>,
    k9: Vec<f64>,
    k10: Vec<f64>,
    ytmp: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Self {
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            k5: z(),
            k6: z(),
            k7: z(),
            k8: z(),
            k9: z(),
            k10: z(),
            ytmp: z(),
        }
    }
}

#[inline]
fn stage<const S: usize>(out: &mut [f64], y: &[f64], h: f64, a: [f64; S], k: [&[f64]; S]) {
    let ha = a.map(|c| c * h);
    for i in 0..out.len() {
        let mut acc = y[i];
        for s in 0..S {
            acc += ha[s] * k[s][i];
        }
        out[i] = acc;
    }
}

#[allow(clippy::excessive_precision)]
mod tableau {
    pub const C2: f64 = 0.526001519587677318785587544488E-01;
    pub const C3: f64 = 0.789002279381515978178381316732E-01;
    pub const C4: f64 = 0.118350341907227396726757197510E+00;
    pub const C5: f64 = 0.281649658092772603273242802490E+00;
    pub const C6: f64 = 0.333333333333333333333333333333E+00;
    pub const C7: f64 = 0.25E+00;
    pub const C8: f64 = 0.307692307692307692307692307692E+00;
    pub const C9: f64 = 0.651282051282051282051282051282E+00;
    pub const C10: f64 = 0.6E+00;
    pub const C11: f64 = 0.857142857142857142857142857142E+00;

    pub const A21: f64 = 5.26001519587677318785587544488E-2;
    pub const A31: f64 = 1.97250569845378994544595329183E-2;
    pub const A32: f64 = 5.91751709536136983633785987549E-2;
    pub const A41: f64 = 2.95875854768068491816892993775E-2;
    pub const A43: f64 = 8.87627564304205475450678981324E-2;
    pub const A51: f64 = 2.41365134159266685502369798665E-1;
    pub const A53: f64 = -8.84549479328286085344864962717E-1;
    pub const A54: f64 = 9.24834003261792003115737966543E-1;
    pub const A61: f64 = 3.7037037037037037037037037037E-2;
    pub const A64: f64 = 1.70828608729473871279604482173E-1;
    pub const A65: f64 = 1.25467687566822425016691814123E-1;
    pub const A71: f64 = 3.7109375E-2;
    pub const A74: f64 = 1.70252211019544039314978060272E-1;
    pub const A75: f64 = 6.02165389804559606850219397283E-2;
    pub const A76: f64 = -1.7578125E-2;
    pub const A81: f64 = 3.70920001185047927108779319836E-2;
    pub const A84: f64 = 1.70383925712239993810214054705E-1;
    pub const A85: f64 = 1.07262030446373284651809199168E-1;
    pub const A86: f64 = -1.53194377486244017527936158236E-2;
    pub const A87: f64 = 8.27378916381402288758473766002E-3;
    pub const A91: f64 = 6.24110958716075717114429577812E-1;
    pub const A94: f64 = -3.36089262944694129406857109825E0;
    pub const A95: f64 = -8.68219346841726006818189891453E-1;
    pub const A96: f64 = 2.75920996994467083049415600797E1;
    pub const A97: f64 = 2.01540675504778934086186788979E1;
    pub const A98: f64 = -4.34898841810699588477366255144E1;
    pub const A101: f64 = 4.77662536438264365890433908527E-1;
    pub const A104: f64 = -2.48811461997166764192642586468E0;
    pub const A105: f64 = -5.90290826836842996371446475743E-1;
    pub const A106: f64 = 2.12300514481811942347288949897E1;
    pub const A107: f64 = 1.52792336328824235832596922938E1;
    pub const A108: f64 = -3.32882109689848629194453265587E1;
    pub const A109: f64 = -2.03312017085086261358222928593E-2;
    pub const A111: f64 = -9.3714243008598732571704021658E-1;
    pub const A114: f64 = 5.18637242884406370830023853209E0;
    pub const A115: f64 = 1.09143734899672957818500254654E0;
    pub const A116: f64 = -8.14978701074692612513997267357E0;
    pub const A117: f64 = -1.85200656599969598641566180701E1;
    pub const A118: f64 = 2.27394870993505042818970056734E1;
    pub const A119: f64 = 2.49360555267965238987089396762E0;
    pub const A1110: f64 = -3.0467644718982195003823669022E0;
    pub const A121: f64 = 2.27331014751653820792359768449E0;
    pub const A124: f64 = -1.05344954667372501984066689879E1;
    pub const A125: f64 = -2.00087205822486249909675718444E0;
    pub const A126: f64 = -1.79589318631187989172765950534E1;
    pub const A127: f64 = 2.79488845294199600508499808837E1;
    pub const A128: f64 = -2.85899827713502369474065508674E0;
    pub const A129: f64 = -8.87285693353062954433549289258E0;
    pub const A1210: f64 = 1.23605671757943030647266201528E1;
    pub const A1211: f64 = 6.43392746015763530355970484046E-1;

    pub const B1: f64 = 5.42937341165687622380535766363E-2;
    pub const B6: f64 = 4.45031289275240888144113950566E0;
    pub const B7: f64 = 1.89151789931450038304281599044E0;
    pub const B8: f64 = -5.8012039600105847814672114227E0;
    pub const B9: f64 = 3.1116436695781989440891606237E-1;
    pub const B10: f64 = -1.52160949662516078556178806805E-1;
    pub const B11: f64 = 2.01365400804030348374776537501E-1;
    pub const B12: f64 = 4.47106157277725905176885569043E-2;

    pub const BHH1: f64 = 0.244094488188976377952755905512E+00;
    pub const BHH2: f64 = 0.733846688281611857341361741547E+00;
    pub const BHH3: f64 = 0.220588235294117647058823529412E-01;

    pub const ER1: f64 = 0.1312004499419488073250102996E-01;
    pub const ER6: f64 = -0.1225156446376204440720569753E+01;
    pub const ER7: f64 = -0.4957589496572501915214079952E+00;
    pub const ER8: f64 = 0.1664377182454986536961530415E+01;
    pub const ER9: f64 = -0.3503288487499736816886487290E+00;
    pub const ER10: f64 = 0.3341791187130174790297318841E+00;
    pub const ER11: f64 = 0.8192320648511571246570742613E-01;
    pub const ER12: f64 = -0.2235530786388629525884427845E-01;
}
