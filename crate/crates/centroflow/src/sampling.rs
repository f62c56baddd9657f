//! Random inputs for the property suites.
//!
//! Curves are drawn as Fourier series with the coefficient decay that convex
//! bodies actually exhibit (|s_n| of harmonic 2n bounded by a multiple of
//! 1/(4n²−1)), then rejection-sampled for convexity, so samples are
//! well-conditioned without being special.

use crate::curve::{self, FourierSpec, LinearMap2, SupportField};
use rand::Rng;

/// Amplitude headroom relative to the convexity-critical coefficient size.
const COEFF_SCALE: f64 = 0.3;

/// Convexity margin: samples are rejected until min 𝔯 clears this fraction of
/// the unit mean radius, so spectral calculus on them stays well conditioned.
const MIN_RADIUS_MARGIN: f64 = 0.1;

/// Random even-harmonic series with a0 = 1 and harmonics on the `fold`-lattice
/// up to index `max_harmonic`, coefficients uniform in ±0.3/(4n²−1).
pub fn random_spec(rng: &mut impl Rng, fold: u32, max_harmonic: usize) -> FourierSpec {
    let mut cos = vec![0.0; max_harmonic];
    let mut sin = vec![0.0; max_harmonic];
    for n in 1..=max_harmonic {
        if n % fold as usize != 0 {
            continue;
        }
        let bound = COEFF_SCALE / ((4 * n * n) as f64 - 1.0);
        cos[n - 1] = rng.random_range(-bound..bound);
        sin[n - 1] = rng.random_range(-bound..bound);
    }
    FourierSpec {
        a0: 1.0,
        cos,
        sin,
    }
}

/// Random convex symmetric curve on an N-point grid; `fold` restricts the
/// spectrum to the π/fold-periodic lattice (fold = 1 for a generic curve).
/// Rejection keeps drawing until the curve is convex with margin.
pub fn random_convex_curve(rng: &mut impl Rng, n_samples: usize, fold: u32) -> SupportField {
    loop {
        let spec = random_spec(rng, fold, 6);
        let Ok(s) = curve::synthesize(&spec, n_samples) else {
            continue;
        };
        if let Ok(r) = curve::radius_of_curvature(&s) {
            if r.iter().all(|&v| v >= MIN_RADIUS_MARGIN) {
                return s;
            }
        }
    }
}

/// Random convex symmetric curve rescaled to enclose area π.
pub fn random_area_pi_curve(rng: &mut impl Rng, n_samples: usize, fold: u32) -> SupportField {
    let s = random_convex_curve(rng, n_samples, fold);
    let area = curve::geometry(&s).expect("sampled curve is convex").area;
    s.scaled((std::f64::consts::PI / area).sqrt())
}

/// Random SL(2) element: entries uniform in [-2, 2], rejected while the
/// determinant is below 0.1, then rescaled to determinant exactly 1.
/// Maps with condition number above 6 are rejected too: their images are
/// slivers that a default-size grid cannot represent to tolerance.
pub fn random_sl2(rng: &mut impl Rng) -> LinearMap2 {
    loop {
        let m = LinearMap2([
            [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
            [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
        ]);
        if m.det() <= 0.1 {
            continue;
        }
        let t = match m.normalized_to_sl2() {
            Some(t) => t,
            None => continue,
        };
        let a = &t.0;
        let frob_sq =
            a[0][0] * a[0][0] + a[0][1] * a[0][1] + a[1][0] * a[1][0] + a[1][1] * a[1][1];
        // det = 1, so the condition number is the largest squared singular value.
        let cond = 0.5 * (frob_sq + (frob_sq * frob_sq - 4.0).max(0.0).sqrt());
        if cond <= 6.0 {
            return t;
        }
    }
}

/// Random strictly positive π-periodic weight field spec.
pub fn random_weight_spec(rng: &mut impl Rng, fold: u32) -> FourierSpec {
    let mut spec = random_spec(rng, fold, 4);
    spec.a0 = rng.random_range(0.5..2.0);
    for c in spec.cos.iter_mut().chain(spec.sin.iter_mut()) {
        *c *= spec.a0;
    }
    spec
}
