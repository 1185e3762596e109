//! Phase-space state types in the rotating frame and the canonical chart
//! transforms between them.
//!
//! Conventions: dimensionless units, primaries of mass `mu` and `1 - mu` at
//! `(1 - mu, 0)` and `(-mu, 0)`. The polar chart is `x = r cos(phi)`,
//! `y = r sin(phi)`; the spherical chart measures `psi` from the `+z` axis,
//! `x = r sin(psi) cos(phi)`, `y = r sin(psi) sin(phi)`, `z = r cos(psi)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarCartesianState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialCartesianState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub r: f64,
    pub phi: f64,
    pub pr: f64,
    pub pphi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalState {
    pub r: f64,
    pub phi: f64,
    pub psi: f64,
    pub pr: f64,
    pub pphi: f64,
    pub ppsi: f64,
}

impl PlanarCartesianState {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        Self { x, y, px, py }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.px, self.py]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Lift onto the invariant plane of the spatial problem.
    pub fn lift(self) -> SpatialCartesianState {
        SpatialCartesianState {
            x: self.x,
            y: self.y,
            z: 0.0,
            px: self.px,
            py: self.py,
            pz: 0.0,
        }
    }
}

impl SpatialCartesianState {
    pub fn new(x: f64, y: f64, z: f64, px: f64, py: f64, pz: f64) -> Self {
        Self { x, y, z, px, py, pz }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.z, self.px, self.py, self.pz]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }
}

impl PolarState {
    pub fn new(r: f64, phi: f64, pr: f64, pphi: f64) -> Self {
        Self { r, phi, pr, pphi }
    }
}

impl SphericalState {
    pub fn new(r: f64, phi: f64, psi: f64, pr: f64, pphi: f64, ppsi: f64) -> Self {
        Self { r, phi, psi, pr, pphi, ppsi }
    }
}

/// Planar Cartesian -> polar, momenta included.
pub fn cart_to_polar(s: &PlanarCartesianState) -> Result<PolarState> {
    let r = s.x.hypot(s.y);
    if r < 1e-14 {
        return Err(Error::domain("polar chart undefined at the origin"));
    }
    let phi = s.y.atan2(s.x);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let pr = s.px * cos_phi + s.py * sin_phi;
    let pphi = r * (-s.px * sin_phi + s.py * cos_phi);
    Ok(PolarState::new(r, phi, pr, pphi))
}

pub fn polar_to_cart(s: &PolarState) -> Result<PlanarCartesianState> {
    if s.r <= 0.0 {
        return Err(Error::domain(format!("polar radius must be positive, got {}", s.r)));
    }
    let (sin_phi, cos_phi) = s.phi.sin_cos();
    Ok(PlanarCartesianState {
        x: s.r * cos_phi,
        y: s.r * sin_phi,
        px: s.pr * cos_phi - s.pphi / s.r * sin_phi,
        py: s.pr * sin_phi + s.pphi / s.r * cos_phi,
    })
}

/// Spatial Cartesian -> spherical; fails on the polar axis where the
/// momentum map degenerates.
pub fn cart_to_spherical(s: &SpatialCartesianState) -> Result<SphericalState> {
    let rho = s.x.hypot(s.y);
    let r = (s.x * s.x + s.y * s.y + s.z * s.z).sqrt();
    if r < 1e-14 {
        return Err(Error::domain("spherical chart undefined at the origin"));
    }
    if rho < 1e-12 * r.max(1.0) {
        return Err(Error::domain("spherical momenta undefined on the polar axis (sin psi = 0)"));
    }
    let phi = s.y.atan2(s.x);
    let psi = rho.atan2(s.z);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let (sin_psi, cos_psi) = psi.sin_cos();
    let pr = (s.px * cos_phi + s.py * sin_phi) * sin_psi + s.pz * cos_psi;
    let pphi = r * sin_psi * (-s.px * sin_phi + s.py * cos_phi);
    let ppsi = r * ((s.px * cos_phi + s.py * sin_phi) * cos_psi - s.pz * sin_psi);
    Ok(SphericalState::new(r, phi, psi, pr, pphi, ppsi))
}

pub fn spherical_to_cart(s: &SphericalState) -> Result<SpatialCartesianState> {
    if s.r <= 0.0 {
        return Err(Error::domain(format!("spherical radius must be positive, got {}", s.r)));
    }
    let sin_psi = s.psi.sin();
    if sin_psi.abs() < 1e-12 {
        return Err(Error::domain("spherical momenta undefined on the polar axis (sin psi = 0)"));
    }
    let (sp, cp) = s.phi.sin_cos();
    let cpsi = s.psi.cos();
    Ok(SpatialCartesianState {
        x: s.r * sin_psi * cp,
        y: s.r * sin_psi * sp,
        z: s.r * cpsi,
        px: s.pr * cp * sin_psi - s.pphi * sp / (s.r * sin_psi) + s.ppsi * cp * cpsi / s.r,
        py: s.pr * sp * sin_psi + s.pphi * cp / (s.r * sin_psi) + s.ppsi * sp * cpsi / s.r,
        pz: s.pr * cpsi - s.ppsi * sin_psi / s.r,
    })
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut w = a.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Difference `a - b` wrapped to `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}
