//! Embedded Runge-Kutta-Fehlberg 7(8) propagation with adaptive steps.
//!
//! The 13-stage pair advances the 8th-order solution (local extrapolation)
//! and controls the step from the difference to the embedded 7th-order
//! solution. Coefficients from Fehlberg's NASA TR R-287, Table X. Steps are
//! clipped to requested sample times, so recorded samples are exact solver
//! states rather than interpolants.

use serde::Serialize;

use crate::error::{Error, Result};

const STAGES: usize = 13;

const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; STAGES] = [
    [0.0; 12],
    [2.0 / 27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 36.0, 1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        -25.0 / 108.0,
        0.0,
        0.0,
        125.0 / 108.0,
        -65.0 / 27.0,
        125.0 / 54.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        31.0 / 300.0,
        0.0,
        0.0,
        0.0,
        61.0 / 225.0,
        -2.0 / 9.0,
        13.0 / 900.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0, 0.0, 0.0, 0.0, 0.0],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

/// 8th-order weights (stages 0-10).
const B8: [f64; STAGES] = [
    41.0 / 840.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    41.0 / 840.0,
    0.0,
    0.0,
];

/// 7th-order weights (stages 5-12, no k0/k10).
const B7: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

/// Step-size and error control for [`propagate`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-12, abs: 1e-12, h_min: 1e-13, max_steps: 5_000_000 }
    }
}

impl Tolerances {
    pub fn with_tol(tol: f64) -> Self {
        Self { rel: tol, abs: tol, ..Self::default() }
    }
}

/// What to record while integrating.
pub enum Sampling {
    /// Every accepted step.
    Steps,
    /// Only the given times (strictly increasing within the span) plus both
    /// endpoints; steps are clipped to land on them exactly.
    Times(Vec<f64>),
    /// Initial and final state only.
    Endpoints,
}

/// Integration output: samples plus solver metadata.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub accepted: usize,
    pub rejected: usize,
    pub tol: Tolerances,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.times.last().unwrap(), *self.states.last().unwrap())
    }
}

fn rkf78_step<const N: usize>(
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<([f64; N], f64, f64)> {
    let mut k = [[0.0; N]; STAGES];
    k[0] = f(t, y)?;
    for i in 1..STAGES {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            let a = A[i][j];
            if a != 0.0 {
                for n in 0..N {
                    yi[n] += h * a * kj[n];
                }
            }
        }
        k[i] = f(t + C[i] * h, &yi)?;
    }
    let mut y8 = *y;
    let mut y7 = *y;
    for (i, ki) in k.iter().enumerate() {
        for n in 0..N {
            y8[n] += h * B8[i] * ki[n];
            y7[n] += h * B7[i] * ki[n];
        }
    }
    let mut err2 = 0.0;
    let mut scale_max: f64 = 0.0;
    for n in 0..N {
        let d = y8[n] - y7[n];
        err2 += d * d;
        scale_max = scale_max.max(y[n].abs()).max(y8[n].abs());
    }
    Ok((y8, err2.sqrt(), scale_max))
}

/// Adaptive integration of `dy/dt = f(t, y)` over `t_span`.
///
/// Works for decreasing spans as well (negative steps). Errors from the
/// field (collisions) are passed through with the failure time attached.
pub fn propagate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    y0: [f64; N],
    t_span: (f64, f64),
    tol: Tolerances,
    sampling: Sampling,
) -> Result<Trajectory<N>> {
    let (t0, t_end) = t_span;
    if tol.rel <= 0.0 || tol.abs <= 0.0 {
        return Err(Error::domain("tolerances must be positive"));
    }
    let span = t_end - t0;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut sample_times = match &sampling {
        Sampling::Times(ts) => {
            let mut v: Vec<f64> = ts
                .iter()
                .copied()
                .filter(|s| (s - t0) * dir > 0.0 && (t_end - s) * dir > 0.0)
                .collect();
            v.sort_by(|a, b| ((a - t0) * dir).partial_cmp(&((b - t0) * dir)).unwrap());
            v
        }
        _ => Vec::new(),
    };
    sample_times.reverse(); // pop() from the near end

    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0],
        accepted: 0,
        rejected: 0,
        tol,
    };
    if span == 0.0 {
        return Ok(traj);
    }

    let mut t = t0;
    let mut y = y0;
    let mut h = dir * (span.abs() / 100.0).min(1e-2).max(tol.h_min * 10.0);

    while (t_end - t) * dir > 0.0 {
        if traj.accepted + traj.rejected > tol.max_steps {
            return Err(Error::numeric(format!(
                "step budget exhausted at t = {t} ({} steps)",
                tol.max_steps
            )));
        }
        // clip to sample times and the endpoint
        let mut record_sample = false;
        let mut target = t_end;
        if let Some(&s) = sample_times.last() {
            if (s - t) * dir > 0.0 {
                target = s;
                record_sample = true;
            } else {
                sample_times.pop();
                continue;
            }
        }
        let h_free = h;
        let mut clipped = false;
        if (t + h - target) * dir >= 0.0 {
            h = target - t;
            clipped = true;
        }

        match rkf78_step(&mut f, t, &y, h) {
            Ok((y_new, err, scale)) => {
                let tol_scale = tol.abs + tol.rel * scale;
                let ratio = err / tol_scale;
                if ratio <= 1.0 {
                    t += h;
                    y = y_new;
                    traj.accepted += 1;
                    let at_target = clipped;
                    match sampling {
                        Sampling::Steps => {
                            traj.times.push(t);
                            traj.states.push(y);
                        }
                        Sampling::Times(_) => {
                            if at_target && record_sample {
                                sample_times.pop();
                                traj.times.push(t);
                                traj.states.push(y);
                            }
                        }
                        Sampling::Endpoints => {}
                    }
                    if clipped {
                        h = h_free; // do not let a clipped landing shrink the controller
                    }
                    let grow = if ratio > 0.0 { 0.9 * ratio.powf(-1.0 / 8.0) } else { 5.0 };
                    h *= grow.clamp(0.2, 5.0);
                } else {
                    traj.rejected += 1;
                    h *= (0.9 * ratio.powf(-1.0 / 8.0)).clamp(0.1, 0.9);
                }
                if h.abs() < tol.h_min {
                    return Err(Error::Singularity {
                        what: "step size underflow (likely collision approach)".into(),
                        dist: h.abs(),
                        t,
                    });
                }
            }
            Err(Error::Singularity { what, dist, .. }) => {
                return Err(Error::Singularity { what, dist, t });
            }
            Err(e) => return Err(e),
        }
    }
    match sampling {
        Sampling::Times(_) | Sampling::Endpoints => {
            if *traj.times.last().unwrap() != t {
                traj.times.push(t);
                traj.states.push(y);
            }
        }
        Sampling::Steps => {}
    }
    Ok(traj)
}

/// Locate `t > t_lo` in `(t_lo, t_hi)` where the scalar `event` function of
/// the flow crosses zero, by bisection with fresh integrations from `(t0,
/// y0)`. The window must bracket exactly one sign change.
pub fn locate_event<const N: usize>(
    f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]> + Copy,
    y0: [f64; N],
    t0: f64,
    window: (f64, f64),
    tol: Tolerances,
    event: impl Fn(&[f64; N]) -> f64,
) -> Result<(f64, [f64; N])> {
    let eval = |tt: f64| -> Result<[f64; N]> {
        if tt == t0 {
            return Ok(y0);
        }
        Ok(propagate(f, y0, (t0, tt), tol, Sampling::Endpoints)?.last().1)
    };
    let (mut a, mut b) = window;
    let mut ga = event(&eval(a)?);
    let gb = event(&eval(b)?);
    if ga == 0.0 {
        return Ok((a, eval(a)?));
    }
    if ga * gb > 0.0 {
        return Err(Error::numeric(format!(
            "event window ({a}, {b}) does not bracket a sign change ({ga:.3e}, {gb:.3e})"
        )));
    }
    let mut y_mid = y0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        y_mid = eval(mid)?;
        let gm = event(&y_mid);
        if gm == 0.0 || (b - a).abs() < 1e-14 * mid.abs().max(1.0) {
            return Ok((mid, y_mid));
        }
        if ga * gm < 0.0 {
            b = mid;
        } else {
            a = mid;
            ga = gm;
        }
    }
    Ok((0.5 * (a + b), y_mid))
}
