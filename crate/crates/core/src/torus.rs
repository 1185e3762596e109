//! Resonant-torus constants for the unperturbed problem.
//!
//! Fixing coprime `(k1, k2)` and an eccentricity `e` selects the torus with
//! fast frequency `omega1 = 1/I1^3 = k1/k2`, i.e. `I1* = (k2/k1)^{1/3}` and
//! `I2* = I1* sqrt(1-e^2)`; every orbit on it is periodic. The complex-time
//! continuation of the orbit angle has a branch point at
//! `t* = (k2/k1)(pi + i K(e))` with
//! `K(e) = 2 artanh((1-e)/sqrt(1-e^2)) - sqrt(1-e^2)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResonantTorus {
    pub k1: u32,
    pub k2: u32,
    pub e: f64,
    /// `(k2/k1)^{1/3}`.
    pub i1_star: f64,
    /// `I1* sqrt(1 - e^2)`.
    pub i2_star: f64,
    /// Fast frequency `k1/k2` of `theta1`.
    pub omega1: f64,
    /// Resonance frequency `1/k2`; the resonant period is `2 pi k2`.
    pub omega_star: f64,
    /// Imaginary scale `K(e)` of the branch point.
    pub big_k: f64,
    /// Branch point `t* = (k2/k1)(pi + i K)` of the angle continuation.
    #[serde(skip)]
    pub t_singular: Complex64,
    /// Diagonal of the frequency Jacobian `D omega(I*) = diag(-3/I1*^4, 0)`.
    pub domega: [f64; 2],
}

/// `K(e)` on `(0, 1)`; strictly decreasing, divergent at `0+`, vanishing at
/// `1-`.
pub fn k_of_e(e: f64) -> Result<f64> {
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::domain(format!("eccentricity must lie in (0, 1), got {e}")));
    }
    let s = (1.0 - e * e).sqrt();
    Ok(2.0 * ((1.0 - e) / s).atanh() - s)
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// All derived constants for the `(k1, k2)` resonance at eccentricity `e`.
pub fn torus_constants(k1: u32, k2: u32, e: f64) -> Result<ResonantTorus> {
    if k1 == 0 || k2 == 0 {
        return Err(Error::domain("resonance integers must be positive"));
    }
    if gcd(k1, k2) != 1 {
        return Err(Error::domain(format!(
            "resonance pair ({k1}, {k2}) is not coprime; reduce it first"
        )));
    }
    let big_k = k_of_e(e)?;
    let ratio = k2 as f64 / k1 as f64;
    let i1_star = ratio.cbrt();
    let i2_star = i1_star * (1.0 - e * e).sqrt();
    Ok(ResonantTorus {
        k1,
        k2,
        e,
        i1_star,
        i2_star,
        omega1: 1.0 / ratio,
        omega_star: 1.0 / k2 as f64,
        big_k,
        t_singular: Complex64::new(ratio * std::f64::consts::PI, ratio * big_k),
        domega: [-3.0 / i1_star.powi(4), 0.0],
    })
}

impl ResonantTorus {
    /// Period `T* = 2 pi / omega*` of the resonance (`2 pi k2`).
    pub fn resonant_period(&self) -> f64 {
        std::f64::consts::TAU * self.k2 as f64
    }

    /// Radial (orbit) period `2 pi k2 / k1`.
    pub fn orbit_period(&self) -> f64 {
        std::f64::consts::TAU * self.k2 as f64 / self.k1 as f64
    }

    /// Semi-latus rectum `I2*^2 = (k2/k1)^{2/3} (1 - e^2)` of the resonant
    /// orbits.
    pub fn semi_latus(&self) -> f64 {
        self.i2_star * self.i2_star
    }
}
