//! Support-function representation of origin-symmetric convex plane curves.
//!
//! A curve is stored as N samples of its support function s(θ) on the uniform
//! grid θ_i = 2πi/N. Origin symmetry (s(θ+π) = s(θ)) is structural: fields are
//! synthesized from even harmonics cos/sin(2nθ) only, and constructors mirror
//! the first half of the grid onto the second so antipodal samples are equal
//! bit for bit. Euclidean geometry (radius of curvature, boundary, area,
//! length) comes out of the spectral calculus in [`crate::spectral`].

use crate::error::{Error, Result};
use crate::spectral::{self, Spectrum};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance on |det T - 1| for a map used as an SL(2) element.
pub const SL2_DET_TOL: f64 = 1e-12;

/// Relative off-lattice energy tolerance used by [`detect_periodicity`].
pub const PERIODICITY_ENERGY_TOL: f64 = 1e-10;

/// Truncated series of a π-periodic field: index n holds the amplitudes of
/// cos(2nθ) and sin(2nθ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpec {
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierSpec {
    pub fn constant(a0: f64) -> Self {
        FourierSpec {
            a0,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    /// Single cosine harmonic a0 + amp·cos(2kθ).
    pub fn cosine(a0: f64, k: usize, amp: f64) -> Self {
        let mut cos = vec![0.0; k];
        cos[k - 1] = amp;
        FourierSpec {
            a0,
            cos,
            sin: Vec::new(),
        }
    }

    /// Highest harmonic index carrying a coefficient.
    pub fn max_harmonic(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    /// Evaluate the series at an angle.
    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.a0;
        for (i, &a) in self.cos.iter().enumerate() {
            acc += a * (2.0 * (i + 1) as f64 * theta).cos();
        }
        for (i, &b) in self.sin.iter().enumerate() {
            acc += b * (2.0 * (i + 1) as f64 * theta).sin();
        }
        acc
    }

    /// Sample the series on the N-point grid, mirroring the first half onto
    /// the second so antipodal samples agree bit for bit. Harmonic angles are
    /// reduced modulo the grid before evaluation. Positivity is not checked.
    pub fn sample_symmetric(&self, n_samples: usize) -> Result<Vec<f64>> {
        let m = self.max_harmonic();
        if n_samples < 8 || n_samples % 4 != 0 {
            return Err(Error::Grid {
                n: n_samples,
                reason: "sample count must be divisible by 4 and at least 8",
            });
        }
        if m > 0 && n_samples <= 4 * m {
            return Err(Error::Grid {
                n: n_samples,
                reason: "sample count too small for the requested harmonics",
            });
        }
        let mut values = vec![0.0; n_samples];
        let half = n_samples / 2;
        for i in 0..half {
            let mut v = self.a0;
            for (h, &a) in self.cos.iter().enumerate() {
                let idx = (2 * (h + 1) * i) % n_samples;
                v += a * (2.0 * PI * idx as f64 / n_samples as f64).cos();
            }
            for (h, &b) in self.sin.iter().enumerate() {
                let idx = (2 * (h + 1) * i) % n_samples;
                v += b * (2.0 * PI * idx as f64 / n_samples as f64).sin();
            }
            values[i] = v;
            values[i + half] = v;
        }
        Ok(values)
    }

    /// Recover the even-harmonic series of a grid field, keeping every harmonic
    /// above `tol` in amplitude (trailing zeros trimmed).
    pub fn analyze(field: &[f64], tol: f64) -> Self {
        let spec = Spectrum::of(field);
        let n = field.len();
        let mut cos = Vec::new();
        let mut sin = Vec::new();
        for h in 1..=n / 4 {
            let (a, b) = spec.harmonic(2 * h);
            cos.push(a);
            sin.push(b);
        }
        while let Some(&a) = cos.last() {
            let b = *sin.last().unwrap();
            if a.abs() <= tol && b.abs() <= tol {
                cos.pop();
                sin.pop();
            } else {
                break;
            }
        }
        FourierSpec {
            a0: spec.mean(),
            cos,
            sin,
        }
    }
}

/// N samples of a positive, origin-symmetric support function.
///
/// Antipodal samples are exactly equal; positivity is checked at construction.
/// Convexity (𝔯 = s_θθ + s > 0) is the curve-level invariant checked by
/// [`geometry`] and by the operations that need it.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportField {
    values: Vec<f64>,
}

impl SupportField {
    /// Validate raw samples: length divisible by 4, strictly positive,
    /// antipodal symmetry to machine precision. Symmetry is then re-pinned
    /// exactly by antipodal averaging.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 8 || n % 4 != 0 {
            return Err(Error::Grid {
                n,
                reason: "sample count must be divisible by 4 and at least 8",
            });
        }
        let (min, max) = spectral::min_max(&values);
        if min <= 0.0 {
            return Err(Error::NotACurve { min_value: min });
        }
        let half = n / 2;
        for i in 0..half {
            let defect = (values[i] - values[i + half]).abs();
            if defect > 1e-9 * max {
                return Err(Error::Grid {
                    n,
                    reason: "antipodal samples differ: field is not origin symmetric",
                });
            }
        }
        spectral::symmetrize(&mut values);
        Ok(SupportField { values })
    }

    /// Wrap samples that are already symmetric and positive by construction.
    pub(crate) fn from_symmetric_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|&v| v > 0.0));
        SupportField { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_samples(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        spectral::min_max(&self.values).0
    }

    pub fn max(&self) -> f64 {
        spectral::min_max(&self.values).1
    }

    /// max s / min s.
    pub fn aspect(&self) -> f64 {
        let (lo, hi) = spectral::min_max(&self.values);
        hi / lo
    }

    /// Dilate by λ > 0.
    pub fn scaled(&self, lambda: f64) -> SupportField {
        SupportField {
            values: self.values.iter().map(|&v| lambda * v).collect(),
        }
    }

    /// Grid angles.
    pub fn thetas(&self) -> Vec<f64> {
        spectral::grid(self.values.len())
    }
}

/// Synthesize a support field from its even-harmonic series.
///
/// The grid must resolve the series (N > 4·max harmonic). Only the first half
/// of the grid is evaluated; the second half is its mirror image, so origin
/// symmetry holds exactly.
pub fn synthesize(spec: &FourierSpec, n_samples: usize) -> Result<SupportField> {
    let values = spec.sample_symmetric(n_samples)?;
    let min = spectral::min_max(&values).0;
    if min <= 0.0 {
        return Err(Error::NotACurve { min_value: min });
    }
    Ok(SupportField { values })
}

/// Spectral derivative of the trigonometric interpolant of a grid field.
pub fn spectral_derivative(field: &[f64], order: u32) -> Vec<f64> {
    spectral::derivative(field, order)
}

/// Radius of curvature 𝔯 = s_θθ + s, or the index/value of the worst
/// violation if the field is not convex.
pub fn radius_of_curvature(s: &SupportField) -> Result<Vec<f64>> {
    let mut r = spectral::derivative(s.values(), 2);
    for (ri, &si) in r.iter_mut().zip(s.values()) {
        *ri += si;
    }
    let mut worst = (0usize, f64::INFINITY);
    for (i, &v) in r.iter().enumerate() {
        if v < worst.1 {
            worst = (i, v);
        }
    }
    if worst.1 <= 0.0 {
        return Err(Error::NotConvex {
            index: worst.0,
            value: worst.1,
        });
    }
    Ok(r)
}

/// Euclidean data derived from a support field.
#[derive(Debug, Clone)]
pub struct CurveGeometry {
    /// 𝔯 = s_θθ + s, strictly positive.
    pub radius_of_curvature: Vec<f64>,
    /// κ = 1/𝔯.
    pub curvature: Vec<f64>,
    /// Boundary points x(θ) = s·z + s_θ·z_⊥.
    pub boundary: Vec<[f64; 2]>,
    /// Enclosed area A = ½∫ s·𝔯 dθ.
    pub area: f64,
    /// Perimeter L = ∫ 𝔯 dθ.
    pub length: f64,
}

/// Compute the Euclidean geometry of a curve, rejecting non-convex fields.
pub fn geometry(s: &SupportField) -> Result<CurveGeometry> {
    let r = radius_of_curvature(s)?;
    let s_theta = spectral::derivative(s.values(), 1);
    let curvature: Vec<f64> = r.iter().map(|&v| 1.0 / v).collect();
    let boundary: Vec<[f64; 2]> = s
        .thetas()
        .iter()
        .zip(s.values().iter().zip(&s_theta))
        .map(|(&t, (&sv, &dv))| {
            let (sin, cos) = t.sin_cos();
            [sv * cos - dv * sin, sv * sin + dv * cos]
        })
        .collect();
    let integrand: Vec<f64> = s.values().iter().zip(&r).map(|(&a, &b)| a * b).collect();
    let area = 0.5 * spectral::quadrature(&integrand);
    let length = spectral::quadrature(&r);
    Ok(CurveGeometry {
        radius_of_curvature: r,
        curvature,
        boundary,
        area,
        length,
    })
}

/// A 2×2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMap2(pub [[f64; 2]; 2]);

impl LinearMap2 {
    pub fn identity() -> Self {
        LinearMap2([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn diagonal(a: f64, d: f64) -> Self {
        LinearMap2([[a, 0.0], [0.0, d]])
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        LinearMap2([[c, -s], [s, c]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Matrix product self·other.
    pub fn compose(&self, other: &LinearMap2) -> LinearMap2 {
        let a = &self.0;
        let b = &other.0;
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        LinearMap2(out)
    }

    /// Tᵗ v.
    pub fn transpose_apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[1][0] * v[1], m[0][1] * v[0] + m[1][1] * v[1]]
    }

    /// T⁻ᵗ v (uses the adjugate; exact for det = 1).
    pub fn inverse_transpose_apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        let det = self.det();
        [
            (m[1][1] * v[0] - m[1][0] * v[1]) / det,
            (-m[0][1] * v[0] + m[0][0] * v[1]) / det,
        ]
    }

    /// Rescale so the determinant becomes exactly +1; None if det ≤ 0.
    pub fn normalized_to_sl2(&self) -> Option<LinearMap2> {
        let d = self.det();
        if d <= 0.0 {
            return None;
        }
        let f = 1.0 / d.sqrt();
        let m = &self.0;
        Some(LinearMap2([
            [m[0][0] * f, m[0][1] * f],
            [m[1][0] * f, m[1][1] * f],
        ]))
    }

    fn require_sl2(&self) -> Result<()> {
        let det = self.det();
        if (det - 1.0).abs() > SL2_DET_TOL {
            return Err(Error::InvalidMap { det });
        }
        Ok(())
    }
}

/// Support function of T(K) for T ∈ SL(2).
///
/// Uses the 1-homogeneous rule s_T(θ) = ‖Tᵗz‖ · s(angle(Tᵗz)), evaluating the
/// trigonometric interpolant of s at the mapped angles. Only the first half of
/// the grid is computed; the mirror half keeps symmetry exact.
pub fn apply_sl2(s: &SupportField, map: &LinearMap2) -> Result<SupportField> {
    map.require_sl2()?;
    let n = s.n_samples();
    let spec = Spectrum::of(s.values());
    let mut values = vec![0.0; n];
    let half = n / 2;
    for (i, &t) in spectral::grid(n).iter().take(half).enumerate() {
        let v = map.transpose_apply([t.cos(), t.sin()]);
        let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let angle = v[1].atan2(v[0]);
        let val = norm * spec.eval(angle);
        values[i] = val;
        values[i + half] = val;
    }
    let min = spectral::min_max(&values).0;
    if min <= 0.0 {
        return Err(Error::NotACurve { min_value: min });
    }
    Ok(SupportField { values })
}

/// Angular fold symmetry of a π-periodic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Periodicity {
    /// Constant field: π/k-periodic for every k.
    Infinite,
    /// Largest k with the whole spectrum on the cos/sin(2nk·θ) lattice.
    Fold(u32),
}

impl Periodicity {
    /// Fold count usable as a seed wavenumber: constants behave like k = 1.
    pub fn fold_or(&self, fallback: u32) -> u32 {
        match self {
            Periodicity::Infinite => fallback,
            Periodicity::Fold(k) => *k,
        }
    }

    pub fn is_at_least(&self, k: u32) -> bool {
        match self {
            Periodicity::Infinite => true,
            Periodicity::Fold(f) => *f >= k,
        }
    }
}

impl std::fmt::Display for Periodicity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Periodicity::Infinite => write!(f, "inf"),
            Periodicity::Fold(k) => write!(f, "{k}"),
        }
    }
}

/// Largest k such that all harmonic energy beyond the mean sits on the
/// cos/sin(2nkθ) lattice, up to a relative energy of 1e-10.
pub fn detect_periodicity(field: &[f64]) -> Periodicity {
    let spec = Spectrum::of(field);
    let n = field.len();
    let max_h = n / 4;
    let energies: Vec<f64> = (1..=max_h).map(|h| spec.harmonic_energy(2 * h)).collect();
    let total: f64 = energies.iter().sum();
    let mean = spec.mean();
    if total <= 1e-20 * mean * mean + f64::MIN_POSITIVE {
        return Periodicity::Infinite;
    }
    for k in (2..=max_h).rev() {
        let off: f64 = energies
            .iter()
            .enumerate()
            .filter(|(i, _)| (i + 1) % k != 0)
            .map(|(_, &e)| e)
            .sum();
        if off <= PERIODICITY_ENERGY_TOL * total {
            return Periodicity::Fold(k as u32);
        }
    }
    Periodicity::Fold(1)
}

/// Uniform support-function bounds for π/k-periodic curves of area π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JohnBounds {
    pub s_lower: f64,
    pub s_upper: f64,
    pub c_k: f64,
}

/// Bounds 1/(π√c_k) < s ≤ π√c_k/2 with c_k = 2k·tan(π/(2k))/π, valid for any
/// π/k-periodic convex support function enclosing area π (k ≥ 2).
pub fn john_bounds(k: u32) -> Result<JohnBounds> {
    if k < 2 {
        return Err(Error::OutOfRange {
            k,
            requirement: "need k >= 2",
        });
    }
    let kf = k as f64;
    let c_k = 2.0 * kf * (PI / (2.0 * kf)).tan() / PI;
    Ok(JohnBounds {
        s_lower: 1.0 / (PI * c_k.sqrt()),
        s_upper: PI * c_k.sqrt() / 2.0,
        c_k,
    })
}

/// Result of checking the Fourier-coefficient decay of a π/k-periodic convex
/// curve: every lattice harmonic must satisfy |s_n| ≤ 2s₀/(4n²k²−1).
#[derive(Debug, Clone, Copy)]
pub struct CoefficientBoundCheck {
    pub pass: bool,
    /// max over harmonics of |s_n|·(4n²k²−1)/(2s₀).
    pub worst_ratio: f64,
}

pub fn fourier_coefficient_bound_check(s: &SupportField, k: u32) -> CoefficientBoundCheck {
    let spec = Spectrum::of(s.values());
    let n = s.n_samples();
    let s0 = spec.mean();
    let mut worst: f64 = 0.0;
    let mut lattice = 1usize;
    // Lattice harmonic n: full-circle wavenumber 2nk.
    while 2 * lattice * (k as usize) <= n / 2 {
        let (a, b) = spec.harmonic(2 * lattice * k as usize);
        let denom = (4 * lattice * lattice * (k as usize) * (k as usize)) as f64 - 1.0;
        let ratio = a.abs().max(b.abs()) * denom / (2.0 * s0);
        worst = worst.max(ratio);
        lattice += 1;
    }
    CoefficientBoundCheck {
        pass: worst <= 1.0 + 1e-12,
        worst_ratio: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ellipse_field(a: f64, b: f64, n: usize) -> SupportField {
        let values = spectral::grid(n)
            .into_iter()
            .map(|t| {
                let (sin, cos) = t.sin_cos();
                (a * a * cos * cos + b * b * sin * sin).sqrt()
            })
            .collect();
        SupportField::new(values).unwrap()
    }

    #[test]
    fn synthesize_constant_is_unit_circle() {
        let s = synthesize(&FourierSpec::constant(1.0), 64).unwrap();
        assert!(s.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn synthesize_cos4theta() {
        // cos index 2 means the harmonic cos(4θ). The field is positive, so
        // synthesis succeeds; it is not convex, which only geometry rejects.
        let s = synthesize(&FourierSpec::cosine(1.0, 2, 0.1), 128).unwrap();
        assert!((s.values()[0] - 1.1).abs() < 1e-15);
        assert!(matches!(geometry(&s), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn synthesize_min_value() {
        let s = synthesize(&FourierSpec::cosine(1.0, 1, 0.1), 128).unwrap();
        assert!((s.min() - 0.9).abs() < 1e-14);
    }

    #[test]
    fn synthesize_rejects_nonpositive() {
        let err = synthesize(&FourierSpec::cosine(1.0, 1, 1.5), 128).unwrap_err();
        match err {
            Error::NotACurve { min_value } => assert!(min_value <= 0.0),
            other => panic!("expected NotACurve, got {other:?}"),
        }
    }

    #[test]
    fn synthesize_rejects_underresolved_grid() {
        let spec = FourierSpec::cosine(1.0, 4, 0.01);
        assert!(synthesize(&spec, 16).is_err());
        assert!(synthesize(&spec, 20).is_ok());
    }

    #[test]
    fn symmetry_is_exact() {
        let spec = FourierSpec {
            a0: 1.0,
            cos: vec![0.05, -0.03, 0.02],
            sin: vec![0.01, 0.04],
        };
        let s = synthesize(&spec, 128).unwrap();
        for i in 0..64 {
            assert_eq!(s.values()[i], s.values()[i + 64]);
        }
    }

    #[test]
    fn geometry_of_unit_circle() {
        let s = synthesize(&FourierSpec::constant(1.0), 64).unwrap();
        let g = geometry(&s).unwrap();
        assert!((g.area - PI).abs() < 1e-13);
        assert!((g.length - 2.0 * PI).abs() < 1e-12);
        assert!(g
            .radius_of_curvature
            .iter()
            .all(|&r| (r - 1.0).abs() < 1e-13));
        // Boundary of the unit circle is the unit circle.
        for (p, t) in g.boundary.iter().zip(spectral::grid(64)) {
            assert!((p[0] - t.cos()).abs() < 1e-12);
            assert!((p[1] - t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn geometry_of_cos2theta_perturbation() {
        let s = synthesize(&FourierSpec::cosine(1.0, 1, 0.1), 256).unwrap();
        let g = geometry(&s).unwrap();
        // 𝔯 = 1 - 0.3 cos 2θ.
        for (i, &t) in spectral::grid(256).iter().enumerate() {
            assert!((g.radius_of_curvature[i] - (1.0 - 0.3 * (2.0 * t).cos())).abs() < 1e-12);
        }
        assert!((g.area - 0.985 * PI).abs() < 1e-12);
        assert!((g.area - 3.094468).abs() < 1e-6);
        assert!((g.length - 2.0 * PI).abs() < 1e-11);
    }

    #[test]
    fn geometry_of_ellipse_area() {
        let s = ellipse_field(2.0, 0.5, 256);
        let g = geometry(&s).unwrap();
        assert!((g.area - PI).abs() < 1e-10);
    }

    #[test]
    fn geometry_rejects_nonconvex() {
        let values: Vec<f64> = spectral::grid(64)
            .into_iter()
            .map(|t| 1.0 + 0.5 * (4.0 * t).cos())
            .collect();
        let s = SupportField::new(values).unwrap();
        match geometry(&s) {
            Err(Error::NotConvex { value, .. }) => assert!(value <= 0.0),
            other => panic!("expected NotConvex, got {other:?}"),
        }
    }

    #[test]
    fn isoperimetric_inequality_holds() {
        for spec in [
            FourierSpec::constant(1.0),
            FourierSpec::cosine(1.0, 1, 0.1),
            FourierSpec::cosine(1.0, 2, 0.05),
        ] {
            let g = geometry(&synthesize(&spec, 128).unwrap()).unwrap();
            assert!(g.length * g.length >= 4.0 * PI * g.area - 1e-10);
        }
    }

    #[test]
    fn sl2_diagonal_on_circle_gives_ellipse() {
        let s = synthesize(&FourierSpec::constant(1.0), 256).unwrap();
        let t = LinearMap2::diagonal(2.0, 0.5);
        let st = apply_sl2(&s, &t).unwrap();
        assert!((st.values()[0] - 2.0).abs() < 1e-12);
        assert!((st.values()[64] - 0.5).abs() < 1e-12);
        let g = geometry(&st).unwrap();
        assert!((g.area - PI).abs() < 1e-8);
    }

    #[test]
    fn sl2_identity_is_identity() {
        let s = synthesize(&FourierSpec::cosine(1.0, 2, 0.05), 128).unwrap();
        let st = apply_sl2(&s, &LinearMap2::identity()).unwrap();
        for (a, b) in s.values().iter().zip(st.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn sl2_composition_back_to_circle() {
        let s = ellipse_field(2.0, 0.5, 256);
        let st = apply_sl2(&s, &LinearMap2::diagonal(0.5, 2.0)).unwrap();
        for &v in st.values() {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn sl2_rejects_non_unimodular() {
        let s = synthesize(&FourierSpec::constant(1.0), 64).unwrap();
        let err = apply_sl2(&s, &LinearMap2::diagonal(2.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidMap { .. }));
    }

    #[test]
    fn periodicity_detection() {
        let f1 = synthesize(&FourierSpec::cosine(1.0, 2, 0.1), 128).unwrap();
        assert_eq!(detect_periodicity(f1.values()), Periodicity::Fold(2));

        let f2 = synthesize(&FourierSpec::cosine(2.0, 1, 1.0), 128).unwrap();
        assert_eq!(detect_periodicity(f2.values()), Periodicity::Fold(1));

        let mut spec = FourierSpec::cosine(1.0, 3, 0.05);
        spec.cos.extend([0.0, 0.0, 0.01]); // adds cos(12θ)
        let f3 = synthesize(&spec, 128).unwrap();
        assert_eq!(detect_periodicity(f3.values()), Periodicity::Fold(3));

        let f4 = synthesize(&FourierSpec::constant(2.5), 64).unwrap();
        assert_eq!(detect_periodicity(f4.values()), Periodicity::Infinite);
    }

    #[test]
    fn john_bounds_reference_values() {
        let b2 = john_bounds(2).unwrap();
        assert!((b2.c_k - 4.0 / PI).abs() < 1e-12);
        assert!((b2.c_k - 1.273240).abs() < 1e-6);
        assert!((b2.s_upper - PI.sqrt()).abs() < 1e-12);
        assert!((b2.s_upper - 1.772454).abs() < 1e-6);
        assert!((b2.s_lower - 0.5 / PI.sqrt()).abs() < 1e-12);
        assert!((b2.s_lower - 0.282095).abs() < 1e-6);

        let b3 = john_bounds(3).unwrap();
        assert!((b3.c_k - 1.102658).abs() < 1e-6);
    }

    #[test]
    fn john_c_k_decreases_to_one() {
        let mut prev = f64::INFINITY;
        for k in 2..=64 {
            let c = john_bounds(k).unwrap().c_k;
            assert!(c > 1.0);
            assert!(c < prev);
            prev = c;
        }
        assert!((john_bounds(64).unwrap().c_k - 1.0) < 1e-3);
    }

    #[test]
    fn john_bounds_rejects_small_k() {
        assert!(matches!(john_bounds(1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn coefficient_bound_examples() {
        let circle = synthesize(&FourierSpec::constant(1.0), 128).unwrap();
        let check = fourier_coefficient_bound_check(&circle, 2);
        assert!(check.pass);
        assert!(check.worst_ratio < 1e-12);

        let s = synthesize(&FourierSpec::cosine(1.0, 2, 0.1), 128).unwrap();
        let check = fourier_coefficient_bound_check(&s, 2);
        assert!(check.pass);
        assert!((check.worst_ratio - 0.75).abs() < 1e-12);
    }

    #[test]
    fn support_field_rejects_asymmetric_input() {
        let mut values = vec![1.0; 64];
        values[3] = 1.5;
        assert!(SupportField::new(values).is_err());
    }
}
