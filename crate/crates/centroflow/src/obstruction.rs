//! Solvability diagnostics for a target Φ.
//!
//! Four independent checks: the eight-critical-point necessary condition, the
//! Kazdan-Warner integrals ∫ (Φ³)′ α / u² (zero for every true solution u),
//! the singular-integral functional B(x, Φ) with its nondegeneracy at critical
//! points, and the winding number of x ↦ (−B(x), Φ′(x)) — solvability follows
//! when Φ is B-nondegenerate and the winding differs from −1.
//!
//! Everything here speaks the Φ = σ convention of the solver; the
//! Kazdan-Warner integrals convert to the ODE form u″ + u = Φ_ode/u³ by
//! cubing Φ internally.

use crate::affine::{count_critical_points, CriticalPoints};
use crate::curve::SupportField;
use crate::error::{Error, Result};
use crate::spectral::{self, Spectrum};
use std::f64::consts::PI;

/// Midpoint-rule resolution for the B integral.
pub const B_QUADRATURE_POINTS: usize = 2048;

/// Sample count on [0, π) for the winding number.
pub const WINDING_SAMPLES: usize = 1024;

/// Relative floor below which |B| at a critical point counts as zero.
const B_DEGENERACY_TOL: f64 = 1e-9;

/// Relative floor on ‖(−B, Φ′)‖ below which the winding map hits the origin.
const ORIGIN_TOL: f64 = 1e-9;

/// B(x, Φ) = ∫₀^π (Φ(x+t) − Φ(x) − ½Φ′(x)·sin 2t)/sin²t dt.
///
/// The integrand extends π-periodically and smoothly across its removable
/// singularities (its limit at t ∈ {0, π} is Φ″(x)/2), so the midpoint rule
/// on t_j = (j+½)π/m — which never touches the endpoints — converges
/// spectrally.
pub fn b_functional(phi: &[f64], x: f64) -> f64 {
    b_functional_with(phi, x, B_QUADRATURE_POINTS)
}

pub fn b_functional_with(phi: &[f64], x: f64, m: usize) -> f64 {
    let spec = Spectrum::of(phi);
    let dphi = spectral::derivative(phi, 1);
    let dspec = Spectrum::of(&dphi);
    let phi_x = spec.eval(x);
    let dphi_x = dspec.eval(x);
    let h = PI / m as f64;
    let mut acc = 0.0;
    for j in 0..m {
        let t = (j as f64 + 0.5) * h;
        let st = t.sin();
        acc += (spec.eval(x + t) - phi_x - 0.5 * dphi_x * (2.0 * t).sin()) / (st * st);
    }
    acc * h
}

/// B on the uniform x-grid x_i = iπ/n for i = 0..n (B is π-periodic in x).
///
/// Each midpoint shift Φ(· + t_j) is produced with one FFT phase shift, so the
/// whole field costs m inverse transforms.
pub fn b_field(phi: &[f64], n_x: usize) -> Vec<f64> {
    b_field_with(phi, n_x, B_QUADRATURE_POINTS)
}

pub fn b_field_with(phi: &[f64], n_x: usize, m: usize) -> Vec<f64> {
    let full = 2 * n_x;
    let base = spectral::resample(phi, full);
    let spec = Spectrum::of(&base);
    let dphi = spectral::derivative(&base, 1);
    let h = PI / m as f64;
    let mut acc = vec![0.0; n_x];
    for j in 0..m {
        let t = (j as f64 + 0.5) * h;
        let st2 = t.sin() * t.sin();
        let s2t = (2.0 * t).sin();
        let shifted = spec.shifted(t);
        for i in 0..n_x {
            acc[i] += (shifted[i] - base[i] - 0.5 * dphi[i] * s2t) / st2;
        }
    }
    for v in &mut acc {
        *v *= h;
    }
    acc
}

/// The eight-critical-point necessary condition: a solvable target has at
/// least 8 critical points; a constant target passes outright (circles).
#[derive(Debug, Clone)]
pub struct NecessaryCondition {
    pub critical: CriticalPoints,
    pub pass: bool,
}

pub fn necessary_condition(phi: &[f64]) -> NecessaryCondition {
    let critical = count_critical_points(phi);
    let pass = match &critical {
        CriticalPoints::Degenerate => true,
        CriticalPoints::Counted(c) => c.count >= 8,
    };
    NecessaryCondition { critical, pass }
}

/// The three Kazdan-Warner integrals ∫₀^π (Φ³)′(x)·α(x)/u²(x) dx for
/// α ∈ {1, cos 2x, sin 2x}; all vanish when u solves the problem for Φ.
pub fn kazdan_warner(phi: &[f64], u: &SupportField) -> [f64; 3] {
    let n = phi.len();
    assert_eq!(n, u.n_samples(), "target and candidate grids must match");
    let phi_ode: Vec<f64> = phi.iter().map(|&v| v * v * v).collect();
    let d = spectral::derivative(&phi_ode, 1);
    let base: Vec<f64> = d
        .iter()
        .zip(u.values())
        .map(|(&dv, &uv)| dv / (uv * uv))
        .collect();
    let thetas = spectral::grid(n);
    let mut out = [0.0; 3];
    for (slot, weight) in [
        (0, None),
        (1, Some(f64::cos as fn(f64) -> f64)),
        (2, Some(f64::sin as fn(f64) -> f64)),
    ] {
        let integrand: Vec<f64> = base
            .iter()
            .zip(&thetas)
            .map(|(&v, &t)| match weight {
                None => v,
                Some(f) => v * f(2.0 * t),
            })
            .collect();
        // The integrand is π-periodic: ∫₀^π is half the full-circle quadrature.
        out[slot] = 0.5 * spectral::quadrature(&integrand);
    }
    out
}

/// Winding number of x ↦ (−B(x), Φ′(x)) around the origin over x ∈ [0, π).
pub fn winding_number(phi: &[f64]) -> Result<i64> {
    winding_number_with(phi, WINDING_SAMPLES, B_QUADRATURE_POINTS)
}

pub fn winding_number_with(phi: &[f64], n_samples: usize, m: usize) -> Result<i64> {
    let b = b_field_with(phi, n_samples, m);
    let full = 2 * n_samples;
    let resampled = spectral::resample(phi, full);
    let dphi = spectral::derivative(&resampled, 1);
    let points: Vec<[f64; 2]> = (0..n_samples).map(|i| [-b[i], dphi[i]]).collect();
    let norms: Vec<f64> = points
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .collect();
    let scale = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let min_norm = norms.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min_norm < ORIGIN_TOL * scale || scale == 0.0 {
        return Err(Error::OriginHit {
            min_norm,
            scale,
        });
    }
    let mut total = 0.0;
    for i in 0..n_samples {
        let a = points[i];
        let b = points[(i + 1) % n_samples];
        let cross = a[0] * b[1] - a[1] * b[0];
        let dot = a[0] * b[0] + a[1] * b[1];
        total += cross.atan2(dot);
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() >= 0.1 {
        return Err(Error::WindingUnresolved {
            residue: turns - rounded,
        });
    }
    Ok(rounded as i64)
}

/// Everything [`diagnose`] measures about a target.
#[derive(Debug, Clone)]
pub struct ObstructionReport {
    pub critical: CriticalPoints,
    pub necessary_condition_pass: bool,
    /// Kazdan-Warner integrals against `u` (the supplied candidate, or the
    /// unit circle when none was given — they vanish identically for any u
    /// when Φ is constant).
    pub kw_integrals: [f64; 3],
    /// B sampled on the uniform grid of [0, π).
    pub b_values: Vec<f64>,
    /// B evaluated at each critical location of Φ (empty when degenerate).
    pub b_at_critical: Vec<f64>,
    pub b_min_at_critical: Option<f64>,
    /// |B| clears the degeneracy floor at every critical point.
    pub b_nondegenerate: bool,
    /// None when the winding map hits the origin (B-degenerate case).
    pub winding: Option<i64>,
    /// B-nondegenerate and winding ≠ −1.
    pub theorem_b_applicable: bool,
}

pub fn diagnose(phi: &[f64], claimed_solution: Option<&SupportField>) -> Result<ObstructionReport> {
    let nc = necessary_condition(phi);
    let unit;
    let u = match claimed_solution {
        Some(u) => u,
        None => {
            unit = SupportField::new(vec![1.0; phi.len()])?;
            &unit
        }
    };
    let kw_integrals = kazdan_warner(phi, u);

    let b_values = b_field(phi, phi.len() / 2);
    let b_scale = b_values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let (b_at_critical, b_min_at_critical, b_nondegenerate) = match &nc.critical {
        CriticalPoints::Degenerate => (Vec::new(), None, false),
        CriticalPoints::Counted(c) => {
            let vals: Vec<f64> = c
                .locations
                .iter()
                .map(|&x| b_functional(phi, x))
                .collect();
            let min = vals
                .iter()
                .map(|v| v.abs())
                .fold(f64::INFINITY, f64::min);
            let nondeg = b_scale > 0.0 && min > B_DEGENERACY_TOL * b_scale;
            (vals, Some(min), nondeg)
        }
    };
    let winding = match winding_number(phi) {
        Ok(w) => Some(w),
        Err(Error::OriginHit { .. }) => None,
        Err(other) => return Err(other),
    };
    let theorem_b_applicable = b_nondegenerate && winding.map(|w| w != -1).unwrap_or(false);
    Ok(ObstructionReport {
        critical: nc.critical,
        necessary_condition_pass: nc.pass,
        kw_integrals,
        b_values,
        b_at_critical,
        b_min_at_critical,
        b_nondegenerate,
        winding,
        theorem_b_applicable,
    })
}
