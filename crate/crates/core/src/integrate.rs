//! Explicit Runge-Kutta integration of complex linear ODE systems.
//!
//! The adaptive method is Dormand-Prince 8(5,3) with Hairer's combined
//! error norm; a classical fixed-step RK4 mode exists for debugging. Steps
//! are shortened to land exactly on every requested sample time.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Adaptive,
    FixedStep { dt: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub method: Method,
    pub max_steps: u64,
    /// Upper bound on the adaptive step, ns.
    pub max_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, method: Method::Adaptive, max_steps: 50_000_000, max_step: f64::INFINITY }
    }
}

impl SolverOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn fixed(dt: f64) -> Self {
        Self { method: Method::FixedStep { dt }, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if let Method::FixedStep { dt } = self.method {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Config("fixed step must be positive".into()));
            }
        }
        if !(self.max_step > 0.0) {
            return Err(Error::Config("max_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
    /// Largest normalized error estimate among accepted steps (<= 1).
    pub max_error_ratio: f64,
}

const C: [f64; 12] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];

const B: [f64; 12] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];

const E3: [f64; 12] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
];

const E5: [f64; 12] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];

const A: [&[f64]; 12] = [
    &[],
    &[0.05260015195876773],
    &[0.0197250569845379, 0.0591751709536137],
    &[0.02958758547680685, 0.0, 0.08876275643042054],
    &[0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792],
    &[0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242],
    &[0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125],
    &[
        0.03709200011850479,
        0.0,
        0.0,
        0.17038392571223998,
        0.10726203044637328,
        -0.015319437748624402,
        0.008273789163814023,
    ],
    &[
        0.6241109587160757,
        0.0,
        0.0,
        -3.3608926294469414,
        -0.868219346841726,
        27.59209969944671,
        20.154067550477894,
        -43.48988418106996,
    ],
    &[
        0.47766253643826434,
        0.0,
        0.0,
        -2.4881146199716677,
        -0.590290826836843,
        21.230051448181193,
        15.279233632882423,
        -33.28821096898486,
        -0.020331201708508627,
    ],
    &[
        -0.9371424300859873,
        0.0,
        0.0,
        5.186372428844064,
        1.0914373489967295,
        -8.149787010746927,
        -18.52006565999696,
        22.739487099350505,
        2.4936055526796523,
        -3.0467644718982196,
    ],
    &[
        2.273310147516538,
        0.0,
        0.0,
        -10.53449546673725,
        -2.0008720582248625,
        -17.9589318631188,
        27.94888452941996,
        -2.8589982771350235,
        -8.87285693353063,
        12.360567175794303,
        0.6433927460157636,
    ],
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 1.0 / 3.0;
const MAX_FACTOR: f64 = 6.0;
const ORDER_EXPONENT: f64 = 1.0 / 8.0;

/// Integrates `y' = f(t, y)` from `t0`, calling `on_sample(k, t_k, y)` at each
/// sample time (non-decreasing, all `>= t0`). `y` holds the final state on return.
pub fn integrate<F, S>(
    mut f: F,
    t0: f64,
    y: &mut [C64],
    samples: &[f64],
    opts: &SolverOptions,
    mut on_sample: S,
) -> Result<SolverStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    S: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    opts.validate()?;
    if samples.windows(2).any(|w| w[1] < w[0]) || samples.first().is_some_and(|&s| s < t0) {
        return Err(Error::Config("sample times must be non-decreasing and start at or after t0".into()));
    }
    match opts.method {
        Method::Adaptive => dop853(&mut f, t0, y, samples, opts, &mut on_sample),
        Method::FixedStep { dt } => rk4(&mut f, t0, y, samples, dt, &mut on_sample),
    }
}

fn axpy_stages(y: &[C64], h: f64, coeffs: &[f64], k: &[Vec<C64>], out: &mut [C64]) {
    out.copy_from_slice(y);
    for (j, &a) in coeffs.iter().enumerate() {
        if a != 0.0 {
            let ha = h * a;
            for (o, kv) in out.iter_mut().zip(&k[j]) {
                *o += kv * ha;
            }
        }
    }
}

fn error_norm(y: &[C64], y_new: &[C64], k: &[Vec<C64>], h: f64, opts: &SolverOptions) -> f64 {
    let mut err5 = 0.0;
    let mut err3 = 0.0;
    for i in 0..y.len() {
        let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
        let mut e5 = ZERO;
        let mut e3 = ZERO;
        for j in 0..12 {
            if E5[j] != 0.0 {
                e5 += k[j][i] * E5[j];
            }
            if E3[j] != 0.0 {
                e3 += k[j][i] * E3[j];
            }
        }
        err5 += (e5 / sc).norm_sqr();
        err3 += (e3 / sc).norm_sqr();
    }
    if err5 == 0.0 && err3 == 0.0 {
        return 0.0;
    }
    let denom = err5 + 0.01 * err3;
    h.abs() * err5 / (denom * y.len() as f64).sqrt()
}

fn rms_scaled(v: &[C64], y: &[C64], opts: &SolverOptions) -> f64 {
    let s: f64 = v
        .iter()
        .zip(y)
        .map(|(a, b)| (a.norm() / (opts.atol + opts.rtol * b.norm())).powi(2))
        .sum();
    (s / v.len().max(1) as f64).sqrt()
}

/// Hairer's starting step heuristic.
fn initial_step<F>(f: &mut F, t0: f64, y: &[C64], f0: &[C64], opts: &SolverOptions, stats: &mut SolverStats) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let d0 = rms_scaled(y, y, opts);
    let d1 = rms_scaled(f0, y, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<C64> = y.iter().zip(f0).map(|(a, b)| a + b * h0).collect();
    let mut f1 = vec![ZERO; y.len()];
    f(t0 + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, y, opts) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(ORDER_EXPONENT)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}

fn dop853<F, S>(
    f: &mut F,
    t0: f64,
    y: &mut [C64],
    samples: &[f64],
    opts: &SolverOptions,
    on_sample: &mut S,
) -> Result<SolverStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    S: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y.len();
    let mut stats = SolverStats::default();
    let mut k: Vec<Vec<C64>> = vec![vec![ZERO; n]; 12];
    let mut stage = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    let mut f_new = vec![ZERO; n];
    let mut t = t0;
    f(t, y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(f, t0, y, &k[0], opts, &mut stats);

    for (idx, &ts) in samples.iter().enumerate() {
        while t < ts {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Integration { t, reason: format!("step budget {} exhausted", opts.max_steps) });
            }
            let remaining = ts - t;
            let clipped = h >= remaining;
            let h_try = if clipped { remaining } else { h };
            if h_try < 1e-14 * t.abs().max(1.0) && !clipped {
                return Err(Error::Integration { t, reason: format!("step size underflow (h = {h_try:e})") });
            }
            for s in 1..12 {
                let (prev, rest) = k.split_at_mut(s);
                axpy_stages(y, h_try, A[s], prev, &mut stage);
                f(t + C[s] * h_try, &stage, &mut rest[0]);
            }
            stats.evaluations += 11;
            axpy_stages(y, h_try, &B, &k, &mut y_new);
            let err = error_norm(y, &y_new, &k, h_try, opts);
            if !err.is_finite() {
                return Err(Error::Integration { t, reason: "non-finite state".into() });
            }
            if err <= 1.0 {
                let t_next = if clipped { ts } else { t + h_try };
                f(t_next, &y_new, &mut f_new);
                stats.evaluations += 1;
                y.copy_from_slice(&y_new);
                std::mem::swap(&mut k[0], &mut f_new);
                t = t_next;
                stats.accepted += 1;
                stats.max_error_ratio = stats.max_error_ratio.max(err);
                let factor =
                    if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-ORDER_EXPONENT)).clamp(MIN_FACTOR, MAX_FACTOR) };
                let proposal = (h_try * factor).min(opts.max_step);
                h = if clipped { proposal.max(h) } else { proposal };
            } else {
                stats.rejected += 1;
                h = h_try * (SAFETY * err.powf(-ORDER_EXPONENT)).max(MIN_FACTOR);
            }
        }
        on_sample(idx, ts, y)?;
    }
    Ok(stats)
}

fn rk4<F, S>(f: &mut F, t0: f64, y: &mut [C64], samples: &[f64], dt: f64, on_sample: &mut S) -> Result<SolverStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    S: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y.len();
    let mut stats = SolverStats::default();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];
    let mut t = t0;
    for (idx, &ts) in samples.iter().enumerate() {
        while t < ts {
            let h = dt.min(ts - t);
            f(t, y, &mut k1);
            tmp.iter_mut().zip(y.iter().zip(&k1)).for_each(|(o, (a, b))| *o = a + b * (0.5 * h));
            f(t + 0.5 * h, &tmp, &mut k2);
            tmp.iter_mut().zip(y.iter().zip(&k2)).for_each(|(o, (a, b))| *o = a + b * (0.5 * h));
            f(t + 0.5 * h, &tmp, &mut k3);
            tmp.iter_mut().zip(y.iter().zip(&k3)).for_each(|(o, (a, b))| *o = a + b * h);
            f(t + h, &tmp, &mut k4);
            for i in 0..n {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
            stats.evaluations += 4;
            stats.accepted += 1;
            t = if h == ts - t { ts } else { t + h };
            if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Integration { t, reason: "non-finite state".into() });
            }
        }
        on_sample(idx, ts, y)?;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::I;

    fn oscillator(omega: f64) -> impl FnMut(f64, &[C64], &mut [C64]) {
        move |_t, y, dy| dy[0] = -I * omega * y[0]
    }

    #[test]
    fn adaptive_matches_exponential() {
        let samples: Vec<f64> = (0..=100).map(|k| k as f64 * 0.7).collect();
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut worst: f64 = 0.0;
        let stats = integrate(oscillator(3.0), 0.0, &mut y, &samples, &SolverOptions::default(), |_, t, y| {
            worst = worst.max((y[0] - C64::from_polar(1.0, -3.0 * t)).norm());
            Ok(())
        })
        .unwrap();
        // global error grows with the accumulated phase, 210 rad here
        assert!(worst < 1e-9 * 3.0 * 70.0, "{worst}");
        assert!(stats.accepted > 0 && stats.max_error_ratio <= 1.0);
    }

    #[test]
    fn samples_are_hit_exactly() {
        let samples = [0.0, 0.1, 0.1, 0.35, 2.0];
        let mut seen = Vec::new();
        let mut y = vec![C64::new(1.0, 0.0)];
        integrate(oscillator(1.0), 0.0, &mut y, &samples, &SolverOptions::default(), |k, t, _| {
            seen.push((k, t));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![(0, 0.0), (1, 0.1), (2, 0.1), (3, 0.35), (4, 2.0)]);
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos(t) y  =>  y = exp(sin t)
        let mut y = vec![C64::new(1.0, 0.0)];
        let samples = [5.0];
        integrate(|t, y, dy| dy[0] = y[0] * t.cos(), 0.0, &mut y, &samples, &SolverOptions::default(), |_, _, _| Ok(()))
            .unwrap();
        assert!((y[0].re - 5f64.sin().exp()).abs() < 1e-8);
    }

    #[test]
    fn fixed_step_rk4_converges() {
        let mut errs = Vec::new();
        for dt in [0.1, 0.05] {
            let mut y = vec![C64::new(1.0, 0.0)];
            integrate(oscillator(2.0), 0.0, &mut y, &[3.0], &SolverOptions::fixed(dt), |_, _, _| Ok(())).unwrap();
            errs.push((y[0] - C64::from_polar(1.0, -6.0)).norm());
        }
        // fourth order: halving dt cuts the error by ~16
        assert!(errs[0] / errs[1] > 12.0, "{errs:?}");
    }

    #[test]
    fn tighter_tolerance_is_more_accurate() {
        let run = |rtol: f64| {
            let mut y = vec![C64::new(1.0, 0.0)];
            let opts = SolverOptions::with_tolerances(rtol, rtol * 1e-3);
            integrate(oscillator(5.0), 0.0, &mut y, &[50.0], &opts, |_, _, _| Ok(())).unwrap();
            (y[0] - C64::from_polar(1.0, -250.0)).norm()
        };
        assert!(run(1e-10) < run(1e-6));
    }

    #[test]
    fn bad_samples_rejected() {
        let mut y = vec![C64::new(1.0, 0.0)];
        assert!(integrate(oscillator(1.0), 1.0, &mut y, &[0.5], &SolverOptions::default(), |_, _, _| Ok(())).is_err());
        assert!(integrate(oscillator(1.0), 0.0, &mut y, &[1.0, 0.5], &SolverOptions::default(), |_, _, _| Ok(())).is_err());
    }
}
