//! Pseudospectral toolkit for the p-weighted centro-affine flow on
//! origin-symmetric convex plane curves, and a flow-based solver for the
//! planar even L₋₂ Minkowski problem s(s_θθ + s)^{1/3} = Φ.
//!
//! Curves are support functions sampled on a uniform angular grid with
//! FFT-backed calculus. On top of that sit the affine differential invariants
//! (affine support function, arc-length, curvature, p-affine lengths), the
//! flow integrator with its monotonicity monitors, the Minkowski solver with
//! scale calibration and residual certification, and the solvability
//! diagnostics (critical-point count, Kazdan-Warner integrals, B-functional,
//! winding number).

pub mod affine;
pub mod cli;
pub mod curve;
pub mod error;
pub mod flow;
pub mod io;
pub mod obstruction;
pub mod sampling;
pub mod selftest;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
