//! Numerics for the planar and spatial circular restricted three-body
//! problem (CR3BP) in the rotating frame, treated as a perturbation of the
//! Kepler problem in the mass ratio `mu`.
//!
//! The crate provides, at desk scale:
//!
//! * exact and O(mu)-truncated vector fields and Hamiltonians in Cartesian,
//!   polar and spherical charts, with an adaptive RKF7(8) propagator
//!   ([`dynamics`], [`propagate`]);
//! * Delaunay action-angle transforms for both problems, built from the
//!   radial and latitudinal generating functions, together with the
//!   perturbation coefficient `h1` driving the slow action drift
//!   ([`delaunay`], [`h1`]);
//! * the resonant-torus constants, the real and complex-time solution of the
//!   implicit Kepler angle equation, and the square-root branch point
//!   `t* = (k2/k1)(pi + i K(e))` of its analytic continuation ([`torus`],
//!   [`kepler`]);
//! * contour quadrature of the Melnikov-type integral `I1(theta2)` around
//!   `t*`, its leading-order closed form, and the nonvanishing verifier for
//!   resonance condition checks ([`melnikov`], [`verify`]).

pub mod audit;
pub mod delaunay;
pub mod delaunay_spatial;
pub mod dynamics;
pub mod error;
pub mod h1;
pub mod kepler;
pub mod melnikov;
pub mod propagate;
pub mod report;
pub mod state;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
pub use state::{PlanarCartesianState, PolarState, SpatialCartesianState, SphericalState};
pub use torus::ResonantTorus;

/// Distance to a primary below which fields refuse to evaluate.
pub const COLLISION_THRESHOLD: f64 = 1e-8;
