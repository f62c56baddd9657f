//! FFT-backed calculus on uniformly sampled 2π-periodic grids.
//!
//! Every field in this crate lives on the grid θ_i = 2πi/N. Differentiation,
//! quadrature, interpolation and antiderivatives all go through the discrete
//! Fourier transform of the samples, so they are exact (up to round-off) for
//! band-limited fields and spectrally accurate for smooth ones.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

fn fft_inverse(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Complex spectrum of a real field, in rustfft's layout: entry `k` holds the
/// coefficient of `e^{ikθ}` scaled by N, with conjugate symmetry `c[N-k] = conj(c[k])`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(field: &[f64]) -> Self {
        let mut coeffs: Vec<Complex64> =
            field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_forward(&mut coeffs);
        Spectrum { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Mean value of the field (c_0 / N).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / self.coeffs.len() as f64
    }

    /// Amplitude pair (a_k, b_k) of the harmonic a_k cos(kθ) + b_k sin(kθ), k ≥ 1.
    pub fn harmonic(&self, k: usize) -> (f64, f64) {
        let n = self.coeffs.len();
        assert!(k >= 1 && k <= n / 2);
        let c = self.coeffs[k];
        if k == n / 2 {
            // Nyquist slot is its own conjugate pair; the symmetric convention
            // assigns it a pure cosine.
            (c.re / n as f64, 0.0)
        } else {
            (2.0 * c.re / n as f64, -2.0 * c.im / n as f64)
        }
    }

    /// Energy (squared amplitude) of harmonic k ≥ 1.
    pub fn harmonic_energy(&self, k: usize) -> f64 {
        let (a, b) = self.harmonic(k);
        a * a + b * b
    }

    /// Back to grid samples.
    pub fn synthesize(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        fft_inverse(&mut buf);
        let scale = 1.0 / self.coeffs.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Grid samples of the field shifted by `delta`: f(θ + delta).
    pub fn shifted(&self, delta: f64) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut buf = self.coeffs.clone();
        for (j, c) in buf.iter_mut().enumerate() {
            let k = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
            if j == n / 2 {
                // Keep the Nyquist mode real under the cosine convention.
                *c *= (k as f64 * delta).cos();
            } else {
                *c *= Complex64::from_polar(1.0, k as f64 * delta);
            }
        }
        fft_inverse(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Evaluate the trigonometric interpolant at an arbitrary angle.
    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.coeffs.len();
        let scale = 1.0 / n as f64;
        let mut acc = self.coeffs[0].re;
        for k in 1..n / 2 {
            let c = self.coeffs[k];
            let (s, co) = (k as f64 * theta).sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        if n >= 2 {
            acc += self.coeffs[n / 2].re * (n as f64 / 2.0 * theta).cos();
        }
        acc * scale
    }
}

/// Spectral derivative of the trigonometric interpolant.
///
/// Order 1 zeroes the Nyquist mode (the standard symmetric convention);
/// order 2 multiplies every mode by -k², Nyquist included.
pub fn derivative(field: &[f64], order: u32) -> Vec<f64> {
    assert!(order == 1 || order == 2, "only orders 1 and 2 are used");
    let n = field.len();
    let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    for j in 0..n {
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        buf[j] = match order {
            1 => {
                if j == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    buf[j] * Complex64::new(0.0, k)
                }
            }
            _ => buf[j] * (-k * k),
        };
    }
    fft_inverse(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Rectangle-rule quadrature over [0, 2π]; spectrally accurate for periodic fields.
pub fn quadrature(field: &[f64]) -> f64 {
    field.iter().sum::<f64>() * (2.0 * PI / field.len() as f64)
}

pub fn mean(field: &[f64]) -> f64 {
    field.iter().sum::<f64>() / field.len() as f64
}

/// max - min of the samples.
pub fn oscillation(field: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in field {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

pub fn min_max(field: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in field {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Cumulative integral F(θ) = ∫₀^θ f, returned at the grid nodes plus the
/// endpoint F(2π) = 2π·mean(f).
///
/// The periodic part is obtained by dividing the spectrum by ik; the mean
/// contributes the linear-in-θ term, so spectral accuracy is preserved.
pub fn cumulative_integral(field: &[f64]) -> Vec<f64> {
    let n = field.len();
    let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    let mean = buf[0].re / n as f64;
    buf[0] = Complex64::new(0.0, 0.0);
    for j in 1..n {
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        if j == n / 2 {
            // cos(kθ) integrates to sin(kθ)/k; the Nyquist cosine mode does so too.
            buf[j] /= Complex64::new(0.0, k);
        } else {
            buf[j] /= Complex64::new(0.0, k);
        }
    }
    fft_inverse(&mut buf);
    let scale = 1.0 / n as f64;
    let periodic: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();
    let p0 = periodic[0];
    let dtheta = 2.0 * PI / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    for (i, &p) in periodic.iter().enumerate() {
        out.push(mean * (i as f64 * dtheta) + p - p0);
    }
    out.push(mean * 2.0 * PI);
    out
}

/// Average antipodal samples: s_i ← (s_i + s_{i+N/2})/2. Pins the π-periodic
/// subspace exactly; requires even length.
pub fn symmetrize(field: &mut [f64]) {
    let n = field.len();
    let half = n / 2;
    for i in 0..half {
        let avg = 0.5 * (field[i] + field[i + half]);
        field[i] = avg;
        field[i + half] = avg;
    }
}

/// Relative energy of the harmonics off the lattice {k·step : k ≥ 1} among all
/// harmonics ≥ 1. Returns 0 for a constant field.
pub fn off_lattice_energy_ratio(field: &[f64], step: usize) -> f64 {
    let spec = Spectrum::of(field);
    let n = field.len();
    let mut total = 0.0;
    let mut off = 0.0;
    for k in 1..=n / 2 {
        let e = spec.harmonic_energy(k);
        total += e;
        if k % step != 0 {
            off += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        off / total
    }
}

/// Grid angles θ_i = 2πi/N.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

/// Resample a field onto a grid of a different size by evaluating its
/// trigonometric interpolant.
pub fn resample(field: &[f64], new_n: usize) -> Vec<f64> {
    if new_n == field.len() {
        return field.to_vec();
    }
    let spec = Spectrum::of(field);
    grid(new_n).into_iter().map(|t| spec.eval(t)).collect()
}
