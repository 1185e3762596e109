//! Planar Delaunay elements `(I1, I2, theta1, theta2)` for the Kepler part
//! of the problem, with both directions of the symplectic transform.
//!
//! `I1` is the square root of the semi-major axis (so the unperturbed energy
//! is `-1/(2 I1^2)` and the fast frequency `1/I1^3`), `I2` the angular
//! momentum `p_phi`. The radial generating function
//!
//! ```text
//! chi(r, I1, I2) = int sqrt(2/rho - 1/I1^2 - I2^2/rho^2) d rho
//! ```
//!
//! is evaluated in closed form through the eccentric anomaly `E`:
//! `chi = I1 (E - pi + e sin E) - |I2| (v - pi)` with `v` the true anomaly,
//! normalized so `chi(r_apo) = 0`. Its exact partials are
//! `chi1 = E - e sin E - pi` (mean anomaly from apoapsis) and
//! `chi2 = sign(I2) (pi - v)`; the angles are `theta1 = chi1` and
//! `theta2 = phi + chi2`. The branch tag `sigma` is the sign of `p_r`,
//! equivalently of `sin E`.
//!
//! On the unperturbed flow `theta1` advances at `1/I1^3` and `theta2` at
//! `-1` (the rotating frame contributes the `-1`).

use serde::{Deserialize, Serialize};

use crate::dynamics::htilde_polar;
use crate::error::{Error, Result};
use crate::state::{wrap_angle, PolarState};

/// Below this eccentricity the perihelion direction is treated as
/// degenerate and the circular conventions apply.
pub const ECC_DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaunayPlanar {
    pub i1: f64,
    pub i2: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Sign of the radial momentum on this branch (+1 ascending, -1
    /// descending).
    pub sigma: i8,
}

impl DelaunayPlanar {
    pub fn eccentricity(&self) -> f64 {
        ecc(self.i1, self.i2)
    }

    /// Perihelion and apoapsis radii `r-+ = I1 (I1 -+ sqrt(I1^2 - I2^2))`.
    pub fn radial_bounds(&self) -> (f64, f64) {
        radial_bounds(self.i1, self.i2)
    }
}

pub fn ecc(i1: f64, i2: f64) -> f64 {
    (1.0 - (i2 / i1).powi(2)).max(0.0).sqrt()
}

pub fn radial_bounds(i1: f64, i2: f64) -> (f64, f64) {
    let d = (i1 * i1 - i2 * i2).max(0.0).sqrt();
    (i1 * (i1 - d), i1 * (i1 + d))
}

fn check_actions(i1: f64, i2: f64) -> Result<()> {
    if !(i1 > 0.0) || !i2.is_finite() {
        return Err(Error::domain(format!("need I1 > 0 and finite I2, got ({i1}, {i2})")));
    }
    if i2.abs() > i1 * (1.0 + 1e-9) {
        return Err(Error::domain(format!(
            "elliptic regime requires |I2| <= I1, got |{i2}| > {i1}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Kepler equation
// ---------------------------------------------------------------------------

/// Solve `E - e sin E = ell` for an unwrapped mean anomaly `ell`, by Newton
/// with a bisection safeguard on the principal cell.
pub fn solve_kepler(ell: f64, e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::domain(format!("eccentricity must be in [0, 1), got {e}")));
    }
    let n = ((ell + std::f64::consts::PI) / std::f64::consts::TAU).floor();
    let lr = ell - std::f64::consts::TAU * n; // in [-pi, pi)
    let (mut lo, mut hi) = (lr - e, lr + e);
    let mut x = lr + 0.85 * e * if lr.sin() >= 0.0 { 1.0 } else { -1.0 };
    x = x.clamp(lo, hi);
    for _ in 0..60 {
        let f = x - e * x.sin() - lr;
        if f.abs() < 5e-15 {
            return Ok(x + std::f64::consts::TAU * n);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = f / (1.0 - e * x.cos());
        let mut next = x - step;
        if !(lo..=hi).contains(&next) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-16 {
            return Ok(next + std::f64::consts::TAU * n);
        }
        x = next;
    }
    let f = x - e * x.sin() - lr;
    if f.abs() < 1e-12 {
        Ok(x + std::f64::consts::TAU * n)
    } else {
        Err(Error::numeric(format!("Kepler solve stalled at residual {f:.3e}")))
    }
}

/// True anomaly for an unwrapped eccentric anomaly, staying on its cell.
pub fn true_from_eccentric(e_anom: f64, e: f64) -> f64 {
    let n = ((e_anom + std::f64::consts::PI) / std::f64::consts::TAU).floor();
    let er = e_anom - std::f64::consts::TAU * n;
    let v = 2.0 * ((1.0 + e).sqrt() * (er / 2.0).sin()).atan2((1.0 - e).sqrt() * (er / 2.0).cos());
    v + std::f64::consts::TAU * n
}

/// Eccentric anomaly for an unwrapped true anomaly, same cell.
pub fn eccentric_from_true(v: f64, e: f64) -> f64 {
    let n = ((v + std::f64::consts::PI) / std::f64::consts::TAU).floor();
    let vr = v - std::f64::consts::TAU * n;
    let ea = 2.0 * ((1.0 - e).sqrt() * (vr / 2.0).sin()).atan2((1.0 + e).sqrt() * (vr / 2.0).cos());
    ea + std::f64::consts::TAU * n
}

// ---------------------------------------------------------------------------
// generating function in closed form
// ---------------------------------------------------------------------------

/// Closed-form values of the radial generating function and its partials at
/// a point `(r, I1, I2)` on branch `sigma`.
#[derive(Debug, Clone, Copy)]
pub struct ChiClosedForm {
    pub chi: f64,
    /// d chi / d I1 at fixed (r, I2); equals theta1.
    pub chi1: f64,
    /// d chi / d I2 at fixed (r, I1).
    pub chi2: f64,
    /// d chi / d r = p_r on this branch.
    pub dchi_dr: f64,
}

pub fn chi_closed(r: f64, i1: f64, i2: f64, sigma: i8) -> Result<ChiClosedForm> {
    check_actions(i1, i2)?;
    let e = ecc(i1, i2);
    if e < ECC_DEGENERATE {
        return Err(Error::domain(
            "chi is degenerate on circular orbits (r is pinned to I1^2)".to_string(),
        ));
    }
    let (r_min, r_max) = radial_bounds(i1, i2);
    if r < r_min * (1.0 - 1e-12) - 1e-14 || r > r_max * (1.0 + 1e-12) + 1e-14 {
        return Err(Error::domain(format!(
            "radius {r} outside the elliptic annulus [{r_min}, {r_max}]"
        )));
    }
    let a = i1 * i1;
    let cos_e = ((1.0 - r / a) / e).clamp(-1.0, 1.0);
    let e_anom = if sigma >= 0 { cos_e.acos() } else { std::f64::consts::TAU - cos_e.acos() };
    let v = true_from_eccentric(e_anom, e);
    let s2 = if i2 >= 0.0 { 1.0 } else { -1.0 };
    let chi = i1 * (e_anom - std::f64::consts::PI + e * e_anom.sin())
        - i2.abs() * (v - std::f64::consts::PI);
    Ok(ChiClosedForm {
        chi,
        chi1: e_anom - e * e_anom.sin() - std::f64::consts::PI,
        chi2: s2 * (std::f64::consts::PI - v),
        dchi_dr: e * e_anom.sin() / (i1 * (1.0 - e * cos_e)),
    })
}

// ---------------------------------------------------------------------------
// transform, both directions
// ---------------------------------------------------------------------------

/// Radius component `R(theta1, I1, I2)` of the inverse transform along with
/// `dR/dtheta1`; solves the Kepler equation for the eccentric anomaly (the
/// same root as the `theta1 = chi1(R)` equation, reparametrized
/// monotonically).
pub fn radius_from_theta1(theta1: f64, i1: f64, i2: f64) -> Result<(f64, f64)> {
    check_actions(i1, i2)?;
    let e = ecc(i1, i2);
    let a = i1 * i1;
    if e < ECC_DEGENERATE {
        return Ok((a, 0.0));
    }
    let ea = solve_kepler(theta1 + std::f64::consts::PI, e)?;
    let den = 1.0 - e * ea.cos();
    Ok((a * den, a * e * ea.sin() / den))
}

pub fn delaunay_from_polar(p: &PolarState) -> Result<DelaunayPlanar> {
    if !(p.r > 0.0) {
        return Err(Error::domain(format!("polar radius must be positive, got {}", p.r)));
    }
    let energy = 0.5 * (p.pr * p.pr + (p.pphi / p.r).powi(2)) - 1.0 / p.r;
    if energy >= -1e-12 {
        return Err(Error::domain(format!(
            "state is not on a bound elliptic orbit (Kepler energy {energy:.6e} >= 0)"
        )));
    }
    let i1 = 1.0 / (-2.0 * energy).sqrt();
    let i2 = p.pphi;
    if i2.abs() > i1 * (1.0 + 1e-9) {
        return Err(Error::domain(format!(
            "angular momentum |{i2}| exceeds the circular bound {i1}"
        )));
    }
    let i2c = i2.clamp(-i1, i1);
    let e = ecc(i1, i2c);
    let a = i1 * i1;
    let s2 = if i2 >= 0.0 { 1.0 } else { -1.0 };
    let (e_anom, v) = if e < ECC_DEGENERATE {
        (0.0, 0.0)
    } else {
        let sin_e = p.pr * p.r / (i1 * e);
        let cos_e = (1.0 - p.r / a) / e;
        let mut ea = sin_e.atan2(cos_e);
        if ea < 0.0 {
            ea += std::f64::consts::TAU;
        }
        (ea, true_from_eccentric(ea, e))
    };
    let sigma = if e_anom <= std::f64::consts::PI { 1 } else { -1 };
    let theta1 = wrap_angle(e_anom - e * e_anom.sin() - std::f64::consts::PI);
    let theta2 = wrap_angle(p.phi + s2 * (std::f64::consts::PI - v));
    Ok(DelaunayPlanar { i1, i2, theta1, theta2, sigma })
}

pub fn polar_from_delaunay(d: &DelaunayPlanar) -> Result<PolarState> {
    check_actions(d.i1, d.i2)?;
    let e = ecc(d.i1, d.i2);
    let a = d.i1 * d.i1;
    let s2 = if d.i2 >= 0.0 { 1.0 } else { -1.0 };
    if e < ECC_DEGENERATE {
        // degenerate circle: theta1 + theta2 carries the azimuth
        let v = d.theta1 + std::f64::consts::PI;
        let phi = d.theta2 - s2 * (std::f64::consts::PI - v);
        return Ok(PolarState::new(a, wrap_angle(phi), 0.0, d.i2));
    }
    let ea = solve_kepler(d.theta1 + std::f64::consts::PI, e)?;
    let den = 1.0 - e * ea.cos();
    let r = a * den;
    let pr = e * ea.sin() / (d.i1 * den);
    let v = true_from_eccentric(ea, e);
    let phi = d.theta2 - s2 * (std::f64::consts::PI - v);
    Ok(PolarState::new(r, wrap_angle(phi), pr, d.i2))
}

/// Unperturbed Hamiltonian in Delaunay variables, `-1/(2 I1^2) - I2`.
pub fn h0_delaunay(i1: f64, i2: f64) -> f64 {
    -0.5 / (i1 * i1) - i2
}

/// Perturbation Hamiltonian expressed through the Delaunay chart.
pub fn htilde_delaunay(i1: f64, i2: f64, theta1: f64, theta2: f64) -> Result<f64> {
    let p = polar_from_delaunay(&DelaunayPlanar { i1, i2, theta1, theta2, sigma: 1 })?;
    htilde_polar(p.r, p.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::planar_field_exact;
    use crate::propagate::{propagate, Sampling, Tolerances};
    use crate::state::{cart_to_polar, PlanarCartesianState};
    use approx::assert_abs_diff_eq;

    #[test]
    fn circular_orbit_actions() {
        let p = PolarState::new(1.0, 0.3, 0.0, 1.0);
        let d = delaunay_from_polar(&p).unwrap();
        assert_abs_diff_eq!(d.i1, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.i2, 1.0, epsilon = 1e-14);
        for k in 0..8 {
            let th1 = -std::f64::consts::PI + k as f64 * 0.7;
            let (r, dr) = radius_from_theta1(th1, 1.0, 1.0).unwrap();
            assert_abs_diff_eq!(r, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(dr, 0.0, epsilon = 1e-14);
        }
        let back = polar_from_delaunay(&d).unwrap();
        assert_abs_diff_eq!(back.r, p.r, epsilon = 1e-13);
        assert_abs_diff_eq!(back.phi, p.phi, epsilon = 1e-13);
    }

    #[test]
    fn radius_attains_bounds() {
        let (i1, e) = (1.1f64, 0.6f64);
        let i2 = i1 * (1.0 - e * e).sqrt();
        let (r_min, r_max) = radial_bounds(i1, i2);
        let (r_peri, _) = radius_from_theta1(-std::f64::consts::PI, i1, i2).unwrap();
        let (r_apo, _) = radius_from_theta1(0.0, i1, i2).unwrap();
        assert_abs_diff_eq!(r_peri, r_min, epsilon = 1e-10);
        assert_abs_diff_eq!(r_apo, r_max, epsilon = 1e-10);
        for k in 0..64 {
            let th1 = -std::f64::consts::PI + k as f64 * std::f64::consts::TAU / 64.0;
            let (r, _) = radius_from_theta1(th1, i1, i2).unwrap();
            assert!(r >= r_min - 1e-10 && r <= r_max + 1e-10);
        }
    }

    #[test]
    fn chi_turning_point_normalization() {
        let (i1, i2) = (1.0, 0.8);
        let (_, r_max) = radial_bounds(i1, i2);
        let c = chi_closed(r_max, i1, i2, 1).unwrap();
        assert_abs_diff_eq!(c.chi, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.dchi_dr, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn chi_radial_derivative_is_pr() {
        let (i1, i2) = (1.0, 0.8);
        for sigma in [1i8, -1] {
            for r in [0.5, 0.9, 1.3, 1.55] {
                let c = chi_closed(r, i1, i2, sigma).unwrap();
                let h = 1e-7;
                let fd = (chi_closed(r + h, i1, i2, sigma).unwrap().chi
                    - chi_closed(r - h, i1, i2, sigma).unwrap().chi)
                    / (2.0 * h);
                let pr_expected = f64::from(sigma)
                    * (2.0 / r - 1.0 / (i1 * i1) - (i2 / r).powi(2)).max(0.0).sqrt();
                assert_abs_diff_eq!(c.dchi_dr, pr_expected, epsilon = 1e-10);
                assert_abs_diff_eq!(fd, pr_expected, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn chi_action_partials_match_finite_differences() {
        let (r, i1, i2) = (0.9, 1.0, 0.8);
        for sigma in [1i8, -1] {
            let c = chi_closed(r, i1, i2, sigma).unwrap();
            let h = 1e-6;
            let d1 = (chi_closed(r, i1 + h, i2, sigma).unwrap().chi
                - chi_closed(r, i1 - h, i2, sigma).unwrap().chi)
                / (2.0 * h);
            let d2 = (chi_closed(r, i1, i2 + h, sigma).unwrap().chi
                - chi_closed(r, i1, i2 - h, sigma).unwrap().chi)
                / (2.0 * h);
            assert_abs_diff_eq!(c.chi1, d1, epsilon = 1e-8);
            assert_abs_diff_eq!(c.chi2, d2, epsilon = 1e-8);
        }
    }

    #[test]
    fn round_trip_both_branches() {
        let samples = [
            PolarState::new(0.9, 0.4, 0.3, 0.8),
            PolarState::new(0.9, 0.4, -0.3, 0.8),
            PolarState::new(1.4, -2.0, 0.1, -0.9), // retrograde
            PolarState::new(0.62, 2.9, -0.45, 0.75),
        ];
        for p in samples {
            let d = delaunay_from_polar(&p).unwrap();
            let q = polar_from_delaunay(&d).unwrap();
            assert_abs_diff_eq!(p.r, q.r, epsilon = 1e-11);
            assert_abs_diff_eq!(wrap_angle(p.phi - q.phi), 0.0, epsilon = 1e-11);
            assert_abs_diff_eq!(p.pr, q.pr, epsilon = 1e-11);
            assert_abs_diff_eq!(p.pphi, q.pphi, epsilon = 1e-11);
            assert_eq!(d.sigma, if p.pr >= 0.0 { 1 } else { -1 });
        }
    }

    #[test]
    fn hyperbolic_state_rejected() {
        let p = PolarState::new(1.0, 0.0, 1.5, 1.2);
        assert!(delaunay_from_polar(&p).is_err());
    }

    #[test]
    fn energy_in_delaunay_variables() {
        let p = PolarState::new(0.9, 0.4, 0.3, 0.8);
        let d = delaunay_from_polar(&p).unwrap();
        let h_direct = 0.5 * (p.pr * p.pr + (p.pphi / p.r).powi(2)) - 1.0 / p.r - p.pphi;
        assert_abs_diff_eq!(h0_delaunay(d.i1, d.i2), h_direct, epsilon = 1e-12);
    }

    /// Transform a propagated mu = 0 orbit and check the action is constant
    /// and the angles advance linearly at (1/I1^3, -1).
    #[test]
    fn unperturbed_flow_in_delaunay() {
        let e = 0.6f64;
        let y0 = [1.0 - e, 0.0, 0.0, ((1.0 + e) / (1.0 - e)).sqrt()];
        let times: Vec<f64> = (1..=40).map(|k| k as f64 * 0.12).collect();
        let traj = propagate(
            |_t, y| planar_field_exact(&PlanarCartesianState::from_array(*y), 0.0),
            y0,
            (0.0, 5.0),
            Tolerances::with_tol(1e-13),
            Sampling::Times(times),
        )
        .unwrap();
        let mut previous: Option<(f64, f64, f64)> = None; // t, th1 unwrapped, th2 unwrapped
        let d0 = delaunay_from_polar(
            &cart_to_polar(&PlanarCartesianState::from_array(traj.states[0])).unwrap(),
        )
        .unwrap();
        let omega1 = 1.0 / d0.i1.powi(3);
        let mut th1_acc = d0.theta1;
        let mut th2_acc = d0.theta2;
        for (t, y) in traj.times.iter().zip(traj.states.iter()) {
            let d = delaunay_from_polar(
                &cart_to_polar(&PlanarCartesianState::from_array(*y)).unwrap(),
            )
            .unwrap();
            assert_abs_diff_eq!(d.i1, d0.i1, epsilon = 1e-10);
            assert_abs_diff_eq!(d.i2, d0.i2, epsilon = 1e-12);
            if let Some((tp, th1p, th2p)) = previous {
                th1_acc = th1p + wrap_angle(d.theta1 - wrap_angle(th1p));
                th2_acc = th2p + wrap_angle(d.theta2 - wrap_angle(th2p));
                let dt = t - tp;
                assert!(dt < std::f64::consts::PI * d0.i1.powi(3)); // unwrap safe
                assert_abs_diff_eq!(th1_acc, th1p + omega1 * dt, epsilon = 1e-8);
                assert_abs_diff_eq!(th2_acc, th2p - dt, epsilon = 1e-8);
            }
            previous = Some((*t, th1_acc, th2_acc));
        }
    }
}
