//! Affine differential invariants of a convex symmetric curve.
//!
//! The affine support function σ = s·𝔯^{1/3} is the unknown of the planar
//! L₋₂ Minkowski problem; the affine arc-length element d𝔰 = 𝔯^{2/3} dθ and
//! the affine curvature μ (through σ_𝔰𝔰 + σμ = 1) drive the flow monitors.
//! The Λ-curve construction gives the second, independent route to these
//! quantities: its Euclidean curvature is s³ and its affine curvature is σ³.

use crate::curve::{self, SupportField};
use crate::error::{Error, Result};
use crate::spectral;

/// Exponent 1 − 3p/(p+2) that weights σ inside the p-affine length.
pub fn sigma_exponent(p: f64) -> f64 {
    1.0 - 3.0 * p / (p + 2.0)
}

pub(crate) fn validate_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::Parameter {
            name: "p",
            value: p,
            range: "(1, 2)",
        });
    }
    Ok(())
}

/// Affine data of a curve at a fixed p, optionally weighted by a positive field Ψ.
#[derive(Debug, Clone)]
pub struct AffineData {
    /// σ = s·𝔯^{1/3}.
    pub sigma: Vec<f64>,
    /// 𝔤 = 𝔯^{2/3}; d𝔰 = 𝔤 dθ.
    pub g_density: Vec<f64>,
    /// Affine curvature from σ_𝔰𝔰 + σμ = 1.
    pub mu: Vec<f64>,
    /// Ω_p = ∫ s𝔯 (κ/s³)^{p/(p+2)} dθ.
    pub omega_p: f64,
    /// Ω_p^Ψ, present when a weight was supplied.
    pub omega_p_weighted: Option<f64>,
}

/// σ alone, for callers that only need the affine support function.
pub fn sigma_field(s: &SupportField) -> Result<Vec<f64>> {
    let r = curve::radius_of_curvature(s)?;
    Ok(s.values()
        .iter()
        .zip(&r)
        .map(|(&sv, &rv)| sv * rv.cbrt())
        .collect())
}

pub fn affine_data(s: &SupportField, p: f64, weight: Option<&[f64]>) -> Result<AffineData> {
    validate_p(p)?;
    if let Some(w) = weight {
        let min = spectral::min_max(w).0;
        if min <= 0.0 {
            return Err(Error::NonPositiveField { min_value: min });
        }
    }
    let r = curve::radius_of_curvature(s)?;
    let sigma: Vec<f64> = s
        .values()
        .iter()
        .zip(&r)
        .map(|(&sv, &rv)| sv * rv.cbrt())
        .collect();
    let g_density: Vec<f64> = r.iter().map(|&rv| rv.powf(2.0 / 3.0)).collect();
    let sigma_ss = affine_second_derivative(&sigma, &g_density);
    let mu: Vec<f64> = sigma
        .iter()
        .zip(&sigma_ss)
        .map(|(&sg, &ss)| (1.0 - ss) / sg)
        .collect();
    // s𝔯(κ/s³)^{p/(p+2)} with κ = 1/𝔯.
    let q = p / (p + 2.0);
    let integrand: Vec<f64> = s
        .values()
        .iter()
        .zip(&r)
        .map(|(&sv, &rv)| sv * rv * (1.0 / (rv * sv * sv * sv)).powf(q))
        .collect();
    let omega_p = spectral::quadrature(&integrand);
    let omega_p_weighted = weight.map(|w| {
        let weighted: Vec<f64> = integrand.iter().zip(w).map(|(&v, &wv)| v * wv).collect();
        spectral::quadrature(&weighted)
    });
    Ok(AffineData {
        sigma,
        g_density,
        mu,
        omega_p,
        omega_p_weighted,
    })
}

fn affine_first_derivative(f: &[f64], g_density: &[f64]) -> Vec<f64> {
    spectral::derivative(f, 1)
        .iter()
        .zip(g_density)
        .map(|(&d, &g)| d / g)
        .collect()
}

fn affine_second_derivative(f: &[f64], g_density: &[f64]) -> Vec<f64> {
    affine_first_derivative(&affine_first_derivative(f, g_density), g_density)
}

/// Derivative of a field with respect to affine arc-length: f_𝔰 = f_θ / 𝔯^{2/3},
/// applied `order` times.
pub fn affine_derivative(f: &[f64], s: &SupportField, order: u32) -> Result<Vec<f64>> {
    assert!(order == 1 || order == 2);
    let r = curve::radius_of_curvature(s)?;
    let g: Vec<f64> = r.iter().map(|&rv| rv.powf(2.0 / 3.0)).collect();
    Ok(match order {
        1 => affine_first_derivative(f, &g),
        _ => affine_second_derivative(f, &g),
    })
}

/// The auxiliary curve Λ(θ) = (∫₀^θ cos α/s³ dα, ∫₀^θ sin α/s³ dα).
#[derive(Debug, Clone)]
pub struct LambdaCurve {
    /// Λ at the grid nodes plus the endpoint Λ(2π); origin symmetry of s makes
    /// the curve close.
    pub points: Vec<[f64; 2]>,
    /// Euclidean curvature κ_Λ; equals s³ pointwise.
    pub euclid_curvature: Vec<f64>,
    /// Affine curvature μ_Λ from the explicit third-derivative formula;
    /// equals σ³ pointwise.
    pub affine_curvature: Vec<f64>,
    /// ‖Λ(2π) − Λ(0)‖.
    pub closure_defect: f64,
}

pub fn lambda_curve(s: &SupportField) -> Result<LambdaCurve> {
    curve::radius_of_curvature(s)?;
    let n = s.n_samples();
    let inv_s3: Vec<f64> = s.values().iter().map(|&v| 1.0 / (v * v * v)).collect();
    let thetas = spectral::grid(n);
    let xp: Vec<f64> = thetas
        .iter()
        .zip(&inv_s3)
        .map(|(&t, &w)| t.cos() * w)
        .collect();
    let yp: Vec<f64> = thetas
        .iter()
        .zip(&inv_s3)
        .map(|(&t, &w)| t.sin() * w)
        .collect();
    let x = spectral::cumulative_integral(&xp);
    let y = spectral::cumulative_integral(&yp);
    let points: Vec<[f64; 2]> = x.iter().zip(&y).map(|(&a, &b)| [a, b]).collect();
    let closure_defect = (points[n][0].powi(2) + points[n][1].powi(2)).sqrt();

    let xpp = spectral::derivative(&xp, 1);
    let ypp = spectral::derivative(&yp, 1);
    let xppp = spectral::derivative(&xp, 2);
    let yppp = spectral::derivative(&yp, 2);

    let euclid_curvature: Vec<f64> = (0..n)
        .map(|i| {
            let w = xp[i] * ypp[i] - xpp[i] * yp[i];
            let speed2 = xp[i] * xp[i] + yp[i] * yp[i];
            w / speed2.powf(1.5)
        })
        .collect();

    // μ_Λ = (x″y‴ − x‴y″)/W^{5/3} − ½ (W^{-2/3})″ with W = x′y″ − x″y′.
    let w_field: Vec<f64> = (0..n).map(|i| xp[i] * ypp[i] - xpp[i] * yp[i]).collect();
    let w_m23: Vec<f64> = w_field.iter().map(|&w| w.powf(-2.0 / 3.0)).collect();
    let w_m23_dd = spectral::derivative(&w_m23, 2);
    let affine_curvature: Vec<f64> = (0..n)
        .map(|i| {
            let term_i = (xpp[i] * yppp[i] - xppp[i] * ypp[i]) / w_field[i].powf(5.0 / 3.0);
            term_i - 0.5 * w_m23_dd[i]
        })
        .collect();

    Ok(LambdaCurve {
        points,
        euclid_curvature,
        affine_curvature,
        closure_defect,
    })
}

/// Relative amplitude below which a field counts as constant for
/// critical-point purposes.
pub const DEGENERATE_OSC_TOL: f64 = 1e-9;

/// Relative floor on |f_θ| below which a sample is treated as a zero.
const DERIVATIVE_FLOOR: f64 = 1e-9;

/// Critical points of a smooth field on [0, 2π).
#[derive(Debug, Clone)]
pub enum CriticalPoints {
    /// Oscillation below 1e-9 of the mean: counting would only see noise.
    Degenerate,
    Counted(CriticalPointCount),
}

#[derive(Debug, Clone)]
pub struct CriticalPointCount {
    /// Multiplicity-weighted count: transversal zeros of f_θ once, tangential
    /// (sign-preserving) touches twice.
    pub count: usize,
    /// Number of distinct critical locations.
    pub distinct: usize,
    /// All critical angles, ascending in [0, 2π).
    pub locations: Vec<f64>,
    /// The subset of locations flagged as tangential touches.
    pub tangential: Vec<f64>,
}

impl CriticalPoints {
    pub fn count(&self) -> Option<usize> {
        match self {
            CriticalPoints::Degenerate => None,
            CriticalPoints::Counted(c) => Some(c.count),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, CriticalPoints::Degenerate)
    }
}

/// Count sign changes of the spectral derivative across the periodic grid.
///
/// Samples with |f_θ| below 1e-9·‖f_θ‖_∞ are treated as zeros; a zero run
/// bracketed by opposite signs is one transversal crossing, by equal signs a
/// tangential touch counted twice.
pub fn count_critical_points(f: &[f64]) -> CriticalPoints {
    let n = f.len();
    let mean = spectral::mean(f);
    let scale = mean.abs().max(spectral::min_max(f).1.abs());
    if spectral::oscillation(f) < DEGENERATE_OSC_TOL * scale {
        return CriticalPoints::Degenerate;
    }
    let d = spectral::derivative(f, 1);
    let dmax = d.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let floor = DERIVATIVE_FLOOR * dmax;
    let thetas = spectral::grid(n);
    let two_pi = 2.0 * std::f64::consts::PI;

    // Indices with a definite sign, cyclic order.
    let solid: Vec<usize> = (0..n).filter(|&i| d[i].abs() > floor).collect();
    if solid.is_empty() {
        return CriticalPoints::Degenerate;
    }

    let mut locations = Vec::new();
    let mut tangential = Vec::new();
    let mut count = 0usize;
    for w in 0..solid.len() {
        let a = solid[w];
        let b = solid[(w + 1) % solid.len()];
        let gap = (b + n - a) % n; // grid steps from a to b going forward
        let theta_a = thetas[a];
        let theta_b = if b > a {
            thetas[b]
        } else {
            thetas[b] + two_pi
        };
        let same_sign = (d[a] > 0.0) == (d[b] > 0.0);
        if !same_sign {
            // One transversal crossing somewhere in (θ_a, θ_b].
            let t = theta_a + (theta_b - theta_a) * d[a] / (d[a] - d[b]);
            locations.push(t.rem_euclid(two_pi));
            count += 1;
        } else if gap > 1 {
            // Zero run with no sign change: tangential touch, multiplicity 2.
            let t = (0.5 * (theta_a + theta_b)).rem_euclid(two_pi);
            locations.push(t);
            tangential.push(t);
            count += 2;
        }
    }
    locations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    tangential.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let distinct = locations.len();
    CriticalPoints::Counted(CriticalPointCount {
        count,
        distinct,
        locations,
        tangential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{synthesize, FourierSpec};
    use std::f64::consts::PI;

    fn ellipse(a: f64, b: f64, n: usize) -> SupportField {
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
    fn circle_affine_data() {
        let s = synthesize(&FourierSpec::constant(1.0), 128).unwrap();
        let data = affine_data(&s, 1.5, None).unwrap();
        for i in 0..128 {
            assert!((data.sigma[i] - 1.0).abs() < 1e-13);
            assert!((data.mu[i] - 1.0).abs() < 1e-12);
            assert!((data.g_density[i] - 1.0).abs() < 1e-13);
        }
        assert!((data.omega_p - 2.0 * PI).abs() < 1e-12);
        assert!(data.omega_p_weighted.is_none());
    }

    #[test]
    fn ellipse_sigma_is_constant() {
        let s = ellipse(2.0, 0.5, 256);
        let data = affine_data(&s, 1.5, None).unwrap();
        for &v in &data.sigma {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn sigma_pointwise_value() {
        let s = synthesize(&FourierSpec::cosine(1.0, 1, 0.1), 256).unwrap();
        let data = affine_data(&s, 1.5, None).unwrap();
        let expected = 1.1 * 0.7f64.cbrt();
        assert!((data.sigma[0] - expected).abs() < 1e-12);
        assert!((expected - 0.9766944).abs() < 1e-6);
    }

    #[test]
    fn affine_derivative_on_circle() {
        let s = synthesize(&FourierSpec::constant(1.0), 128).unwrap();
        let f: Vec<f64> = spectral::grid(128).iter().map(|&t| (2.0 * t).sin()).collect();
        let d = affine_derivative(&f, &s, 1).unwrap();
        for (i, &t) in spectral::grid(128).iter().enumerate() {
            assert!((d[i] - 2.0 * (2.0 * t).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_mu_identity() {
        let s = synthesize(&FourierSpec::cosine(1.0, 2, 0.05), 256).unwrap();
        let data = affine_data(&s, 1.5, None).unwrap();
        let sigma_ss = affine_derivative(&data.sigma, &s, 2).unwrap();
        for i in 0..256 {
            let lhs = sigma_ss[i] + data.sigma[i] * data.mu[i];
            assert!((lhs - 1.0).abs() < 1e-8, "identity defect {} at {}", lhs - 1.0, i);
        }
    }

    #[test]
    fn lambda_of_circle() {
        let s = synthesize(&FourierSpec::constant(1.0), 128).unwrap();
        let lam = lambda_curve(&s).unwrap();
        for (i, &t) in spectral::grid(128).iter().enumerate() {
            assert!((lam.points[i][0] - t.sin()).abs() < 1e-12);
            assert!((lam.points[i][1] - (1.0 - t.cos())).abs() < 1e-12);
            assert!((lam.euclid_curvature[i] - 1.0).abs() < 1e-10);
            assert!((lam.affine_curvature[i] - 1.0).abs() < 1e-10);
        }
        assert!(lam.closure_defect < 1e-13);
    }

    #[test]
    fn lambda_identities_on_perturbed_curve() {
        let s = synthesize(&FourierSpec::cosine(1.0, 2, 0.05), 256).unwrap();
        let lam = lambda_curve(&s).unwrap();
        let sigma = sigma_field(&s).unwrap();
        assert!(lam.closure_defect < 1e-10);
        for i in 0..256 {
            let s3 = s.values()[i].powi(3);
            assert!((lam.euclid_curvature[i] - s3).abs() < 1e-6);
            assert!((lam.affine_curvature[i] - sigma[i].powi(3)).abs() < 1e-6);
        }
    }

    #[test]
    fn critical_points_of_two_plus_cos() {
        let f: Vec<f64> = spectral::grid(256)
            .into_iter()
            .map(|t| 2.0 + (2.0 * t).cos())
            .collect();
        match count_critical_points(&f) {
            CriticalPoints::Counted(c) => {
                assert_eq!(c.count, 4);
                let expected = [0.0, PI / 2.0, PI, 1.5 * PI];
                assert_eq!(c.locations.len(), 4);
                for (loc, exp) in c.locations.iter().zip(expected) {
                    let d = (loc - exp).abs().min((loc - exp - 2.0 * PI).abs());
                    assert!(d < 1e-6, "location {loc} vs {exp}");
                }
            }
            CriticalPoints::Degenerate => panic!("not degenerate"),
        }
    }

    #[test]
    fn tangential_touches_count_twice() {
        // f_θ = (cos4θ − cos2θ)/2 = (2cos2θ+1)(cos2θ−1)/2: simple zeros at
        // cos2θ = −1/2 (four crossings) and sign-preserving touches at
        // θ = 0, π where cos2θ = 1.
        let f: Vec<f64> = spectral::grid(256)
            .into_iter()
            .map(|t| 2.0 - (2.0 * t).sin() / 4.0 + (4.0 * t).sin() / 8.0)
            .collect();
        match count_critical_points(&f) {
            CriticalPoints::Counted(c) => {
                assert_eq!(c.distinct, 6, "locations {:?}", c.locations);
                assert_eq!(c.count, 8, "4 crossings + 2 double touches");
                assert_eq!(c.tangential.len(), 2);
                for (touch, expected) in c.tangential.iter().zip([0.0, PI]) {
                    let d = (touch - expected)
                        .abs()
                        .min((touch - expected - 2.0 * PI).abs());
                    assert!(d < 1e-2, "touch at {touch}, expected {expected}");
                }
            }
            CriticalPoints::Degenerate => panic!("field is not degenerate"),
        }
    }

    #[test]
    fn constant_sigma_is_degenerate() {
        let sigma = sigma_field(&ellipse(2.0, 0.5, 256)).unwrap();
        assert!(count_critical_points(&sigma).is_degenerate());
    }

    #[test]
    fn sigma_of_fourfold_curve_has_eight_critical_points() {
        let s = synthesize(&FourierSpec::cosine(1.0, 2, 0.05), 256).unwrap();
        let sigma = sigma_field(&s).unwrap();
        let count = count_critical_points(&sigma).count().unwrap();
        assert!(count >= 8, "got {count}");
    }

    #[test]
    fn p_affine_isoperimetric_with_ellipse_equality() {
        let p = 1.5;
        let s = ellipse(2.0, 0.5, 256);
        let g = curve::geometry(&s).unwrap();
        let data = affine_data(&s, p, None).unwrap();
        let lhs = data.omega_p.powf(2.0 + p);
        let rhs = 2.0f64.powf(2.0 + p) * PI.powf(2.0 * p) * g.area.powf(2.0 - p);
        assert!(lhs <= rhs * (1.0 + 1e-8));
        assert!((lhs / rhs - 1.0).abs() < 1e-8, "ellipse equality, ratio {}", lhs / rhs);
    }

    #[test]
    fn rejects_p_outside_range() {
        let s = synthesize(&FourierSpec::constant(1.0), 64).unwrap();
        assert!(affine_data(&s, 2.5, None).is_err());
        assert!(affine_data(&s, 1.0, None).is_err());
    }
}
