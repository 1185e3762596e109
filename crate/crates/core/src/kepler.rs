//! Real and complex-time solution of the orbit-angle equation on a resonant
//! torus, and the local behaviour near its branch point.
//!
//! The inertial angle `varphi(t)` (true anomaly up to the chosen origin)
//! satisfies the implicit relation obtained by integrating the unperturbed
//! flow; parametrized by the eccentric anomaly `E` it reads
//!
//! ```text
//! E - e sin E = omega1 t - pi,      omega1 = k1/k2,
//! ```
//!
//! which is entire in `E` and `t`, so analytic continuation reduces to
//! complex Newton on this single equation. Its only finite-`t` obstructions
//! are the fold points `1 - e cos E = 0`; the one continued from the real
//! axis sits at `t* = (k2/k1)(pi + i K(e))`, where `Im varphi` diverges and
//! `exp(-i varphi)` has a square-root branch point. Trigonometric functions
//! of `varphi` are rational in `exp(+-iE)` and are evaluated without any
//! branch cuts; the unwrapped `varphi` itself is reconstructed incrementally
//! for reporting.
//!
//! Normalization: apoapsis at `t = 0`, perihelion (`varphi = 0`) at
//! `t = k2 pi / k1`, matching `varphi(2 pi k2/k1) = pi`.

use num_complex::Complex64;

use crate::delaunay::{solve_kepler, true_from_eccentric};
use crate::error::{Error, Result};
use crate::torus::ResonantTorus;

/// Continuation cannot step closer to a waypoint than this.
pub const MIN_CONTINUATION_STEP: f64 = 1e-6;

/// Solve for the unwrapped real angle `varphi(t)`.
pub fn solve_phi_real(t: f64, torus: &ResonantTorus) -> Result<f64> {
    let m = torus.omega1 * t - std::f64::consts::PI;
    let e_anom = solve_kepler(m, torus.e)?;
    Ok(true_from_eccentric(e_anom, torus.e))
}

/// Residual of the implicit relation in its quadrature form
/// `omega1 t = 2 atan((1-e) tan(varphi/2)/sqrt(1-e^2))
///            - e sqrt(1-e^2) sin(varphi)/(1+e cos(varphi)) + pi`,
/// evaluated cell-consistently for an unwrapped `varphi`.
pub fn implicit_residual(t: f64, varphi: f64, torus: &ResonantTorus) -> f64 {
    let e = torus.e;
    let n = ((varphi + std::f64::consts::PI) / std::f64::consts::TAU).floor();
    let vr = varphi - std::f64::consts::TAU * n;
    let s = (1.0 - e * e).sqrt();
    // 2 atan((1-e) tan(vr/2)/s) written through atan2 so vr = +-pi is finite
    let half = 0.5 * vr;
    let atan_term = 2.0 * ((1.0 - e) * half.sin()).atan2(s * half.cos());
    let rhs = atan_term + std::f64::consts::TAU * n
        - e * s * vr.sin() / (1.0 + e * vr.cos())
        + std::f64::consts::PI;
    torus.omega1 * t - rhs
}

/// Flow-rate relation `dvarphi/dt = (k1/k2)(1+e cos varphi)^2/(1-e^2)^{3/2}`.
pub fn phi_rate(varphi: f64, torus: &ResonantTorus) -> f64 {
    torus.omega1 * (1.0 + torus.e * varphi.cos()).powi(2) / (1.0 - torus.e * torus.e).powf(1.5)
}

// ---------------------------------------------------------------------------
// complex continuation
// ---------------------------------------------------------------------------

/// A polyline in complex time for analytic continuation.
#[derive(Debug, Clone)]
pub struct ComplexPath {
    pub waypoints: Vec<Complex64>,
}

impl ComplexPath {
    pub fn line(from: Complex64, to: Complex64) -> Self {
        Self { waypoints: vec![from, to] }
    }

    /// Circle around `center`, radius `delta`, from `start_angle` over
    /// `turns` full revolutions (counterclockwise for positive `turns`),
    /// discretized into `segments` waypoints per turn.
    pub fn circle(center: Complex64, delta: f64, start_angle: f64, turns: f64, segments: usize) -> Self {
        let n = ((segments as f64) * turns.abs()).ceil() as usize;
        let mut waypoints = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let a = start_angle + std::f64::consts::TAU * turns * j as f64 / n as f64;
            waypoints.push(center + Complex64::from_polar(delta, a));
        }
        Self { waypoints }
    }

    pub fn then(mut self, mut other: ComplexPath) -> Self {
        self.waypoints.append(&mut other.waypoints);
        self
    }
}

/// Continuation state along a complex-time path.
#[derive(Debug, Clone)]
pub struct Continuation {
    e: f64,
    omega1: f64,
    /// Current complex time.
    pub t: Complex64,
    /// Current eccentric anomaly (sheet tracked by continuity).
    pub e_anom: Complex64,
    /// Unwrapped angle `varphi(t)`.
    pub varphi: Complex64,
    /// `exp(+i varphi)` and `exp(-i varphi)`.
    pub eip: Complex64,
    pub eim: Complex64,
    /// Largest Newton residual accepted at any waypoint.
    pub max_residual: f64,
}

/// Trigonometry of `varphi` as rational functions of the eccentric anomaly.
fn varphi_exponentials(e_anom: Complex64, e: f64) -> (Complex64, Complex64) {
    let den = Complex64::new(1.0, 0.0) - e * e_anom.cos();
    let cos_v = (e_anom.cos() - e) / den;
    let sin_v = (1.0 - e * e).sqrt() * e_anom.sin() / den;
    (cos_v + Complex64::i() * sin_v, cos_v - Complex64::i() * sin_v)
}

fn newton_complex(e: f64, m: Complex64, start: Complex64) -> Option<(Complex64, f64, usize)> {
    let mut x = start;
    for it in 1..=12 {
        let f = x - e * x.sin() - m;
        let fp = Complex64::new(1.0, 0.0) - e * x.cos();
        if fp.norm() < 1e-14 {
            return None;
        }
        let dx = f / fp;
        x -= dx;
        if dx.norm() < 1e-13 * (1.0 + x.norm()) {
            let res = (x - e * x.sin() - m).norm();
            return Some((x, res, it));
        }
    }
    None
}

impl Continuation {
    /// Start on the real axis, where the branch is fixed by the real
    /// solution.
    pub fn start_real(torus: &ResonantTorus, t: f64) -> Result<Self> {
        let m = torus.omega1 * t - std::f64::consts::PI;
        let e_anom = solve_kepler(m, torus.e)?;
        let varphi = true_from_eccentric(e_anom, torus.e);
        let ec = Complex64::new(e_anom, 0.0);
        let (eip, eim) = varphi_exponentials(ec, torus.e);
        Ok(Self {
            e: torus.e,
            omega1: torus.omega1,
            t: Complex64::new(t, 0.0),
            e_anom: ec,
            varphi: Complex64::new(varphi, 0.0),
            eip,
            eim,
            max_residual: 0.0,
        })
    }

    fn commit(&mut self, t: Complex64, e_anom: Complex64, residual: f64) {
        let (eip, eim) = varphi_exponentials(e_anom, self.e);
        // unwrap varphi through exp(-i varphi), which stays away from zero
        let dv = Complex64::i() * (eim / self.eim).ln();
        self.varphi += dv;
        self.eip = eip;
        self.eim = eim;
        self.e_anom = e_anom;
        self.t = t;
        self.max_residual = self.max_residual.max(residual);
    }

    /// Continue to `t_next`, subdividing adaptively. Steps shrink when
    /// Newton struggles (floor [`MIN_CONTINUATION_STEP`]) and expand when it
    /// converges quickly.
    pub fn step_to(&mut self, t_next: Complex64) -> Result<()> {
        let total = (t_next - self.t).norm();
        if total == 0.0 {
            return Ok(());
        }
        let mut frac = 1.0f64; // fraction of the remaining leg per attempt
        let mut steps = 0usize;
        while (t_next - self.t).norm() > 0.0 {
            steps += 1;
            if steps > 100_000 {
                return Err(Error::ContinuationStall {
                    closest: (t_next - self.t).norm(),
                    steps,
                });
            }
            let remaining = t_next - self.t;
            let t_try = if frac >= 1.0 { t_next } else { self.t + remaining * frac };
            let m = self.omega1 * t_try - std::f64::consts::PI;
            match newton_complex(self.e, m, self.e_anom) {
                Some((root, res, iters)) => {
                    // reject a convergence that jumped to another sheet
                    let moved = (root - self.e_anom).norm();
                    let fold_gap = (Complex64::new(1.0, 0.0) - self.e * self.e_anom.cos()).norm();
                    if moved > 0.5 * fold_gap.max(0.05) && frac * total > MIN_CONTINUATION_STEP {
                        frac *= 0.5;
                        continue;
                    }
                    self.commit(t_try, root, res);
                    if iters <= 2 {
                        frac = (frac * 2.0).min(1.0);
                    } else if iters > 5 {
                        frac = (frac * 0.5).max(1e-9);
                    }
                }
                None => {
                    if frac * total <= MIN_CONTINUATION_STEP {
                        return Err(Error::ContinuationStall {
                            closest: (t_next - self.t).norm(),
                            steps,
                        });
                    }
                    frac *= 0.5;
                }
            }
        }
        Ok(())
    }
}

/// Continue `varphi` along `path` (which must start on the real axis) and
/// return the final continuation state.
pub fn continue_phi(path: &ComplexPath, torus: &ResonantTorus) -> Result<Continuation> {
    let first = path
        .waypoints
        .first()
        .ok_or_else(|| Error::domain("empty continuation path"))?;
    if first.im.abs() > 1e-12 {
        return Err(Error::domain("continuation paths must start on the real axis"));
    }
    let mut c = Continuation::start_real(torus, first.re)?;
    for w in &path.waypoints[1..] {
        c.step_to(*w)?;
    }
    Ok(c)
}

// ---------------------------------------------------------------------------
// local asymptotics at the branch point
// ---------------------------------------------------------------------------

/// Leading-order `exp(-i varphi)` near `t*`:
/// `branch * (1-i) (1-e^2)^{3/4} sqrt(k2/k1) / (e sqrt(t - t*))`
/// with the principal square root; `branch` is `+-1` and is fixed by
/// [`calibrate_branch`] to match the continuation from the real axis.
pub fn singular_asymptotic(t: Complex64, torus: &ResonantTorus, branch: f64) -> Complex64 {
    singular_asymptotic_wound(t, torus, branch, 0)
}

/// Same as [`singular_asymptotic`] after continuing `t - t*` through
/// `windings` extra full turns around the branch point; each turn flips the
/// sign of the square root.
pub fn singular_asymptotic_wound(
    t: Complex64,
    torus: &ResonantTorus,
    branch: f64,
    windings: i32,
) -> Complex64 {
    let zeta = t - torus.t_singular;
    let amp = (1.0 - torus.e * torus.e).powf(0.75) / torus.e / torus.omega1.sqrt();
    let flip = if windings.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    flip * branch * Complex64::new(1.0, -1.0) * amp / zeta.sqrt()
}

/// Determine the branch sign of [`singular_asymptotic`] by continuing from
/// the real axis to one calibration point below `t*`.
pub fn calibrate_branch(torus: &ResonantTorus) -> Result<f64> {
    let ts = torus.t_singular;
    let delta = (1e-3_f64).min(0.25 * ts.im);
    let path = ComplexPath::line(Complex64::new(ts.re, 0.0), ts - Complex64::i() * delta);
    let c = continue_phi(&path, torus)?;
    let ratio = c.eim / singular_asymptotic(c.t, torus, 1.0);
    if !ratio.re.is_finite() || ratio.norm() < 0.5 {
        return Err(Error::numeric(format!(
            "branch calibration inconclusive (ratio {ratio})"
        )));
    }
    Ok(if ratio.re >= 0.0 { 1.0 } else { -1.0 })
}
