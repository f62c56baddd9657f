//! Time integration of the p-weighted centro-affine flow
//! ∂x/∂t = −Ψ(z)·s·(κ/s³)^{p/(p+2)}·z on support functions, with the exact
//! area-π rescaling as the normalized variant.
//!
//! The support function obeys s_t = −Ψ s^{1−3p/(p+2)} 𝔯^{−p/(p+2)}, a
//! stiff-parabolic equation: steps are classical RK4 under the parabolic CFL
//! dt ≤ dt_safety·Δθ²/D_max, with D_max the linearized diffusivity
//! (p/(p+2))·Ψ s^{1−3p/(p+2)} 𝔯^{−p/(p+2)−1}, and additionally capped so the
//! area never changes by more than 5% in one step. Every accepted step is
//! re-symmetrized by antipodal averaging, so round-off never excites odd
//! harmonics. The trace records the quantities that are provably monotone
//! (minimum speed, Ω_p^Ψ/A^{(2−p)/(2+p)}) so runs double as checks.

use crate::affine;
use crate::curve::{radius_of_curvature, FourierSpec, SupportField};
use crate::error::{Error, Result};
use crate::spectral;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Fraction of the area allowed to disappear in a single step.
const AREA_STEP_CAP: f64 = 0.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Flow exponent, strictly between 1 and 2.
    pub p: f64,
    /// Weight Ψ as an even-harmonic series; must be positive on the grid.
    pub psi: FourierSpec,
    pub n_samples: usize,
    /// CFL safety factor for the parabolic step bound.
    pub dt_safety: f64,
    pub t_max: f64,
    pub max_steps: usize,
    /// Rescale to area π after every step and track the normalized time τ.
    pub normalize: bool,
    /// Stop once osc(log(Φ/σ)) with Φ = Ψ^{(p+2)/(3p)} falls below this;
    /// non-positive disables the check.
    pub stop_residual: f64,
    /// Stop once max s / min s exceeds this.
    pub aspect_max: f64,
    /// Convexity floor: the run halts gracefully when min 𝔯 drops to it.
    pub r_min: f64,
    /// Unnormalized runs stop once the area falls below this fraction of the
    /// initial area.
    pub area_stop_frac: f64,
}

impl FlowConfig {
    pub fn new(p: f64, psi: FourierSpec) -> Self {
        FlowConfig {
            p,
            psi,
            n_samples: 256,
            dt_safety: 0.2,
            t_max: f64::INFINITY,
            max_steps: 200_000,
            normalize: false,
            stop_residual: 0.0,
            aspect_max: 50.0,
            r_min: 1e-6,
            area_stop_frac: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        affine::validate_p(self.p)?;
        if self.n_samples < 8 || self.n_samples % 4 != 0 {
            return Err(Error::Grid {
                n: self.n_samples,
                reason: "sample count must be divisible by 4 and at least 8",
            });
        }
        for (name, value, ok) in [
            ("dt_safety", self.dt_safety, self.dt_safety > 0.0),
            ("t_max", self.t_max, self.t_max > 0.0),
            ("aspect_max", self.aspect_max, self.aspect_max > 1.0),
            ("r_min", self.r_min, self.r_min > 0.0),
            (
                "area_stop_frac",
                self.area_stop_frac,
                self.area_stop_frac >= 0.0 && self.area_stop_frac < 1.0,
            ),
        ] {
            if !ok {
                return Err(Error::Parameter {
                    name,
                    value,
                    range: "a positive value (area_stop_frac in [0,1))",
                });
            }
        }
        Ok(())
    }

    /// Ψ sampled on the grid, validated positive.
    pub fn psi_field(&self) -> Result<Vec<f64>> {
        let field = self.psi.sample_symmetric(self.n_samples)?;
        let min = spectral::min_max(&field).0;
        if min <= 0.0 {
            return Err(Error::NonPositiveField { min_value: min });
        }
        Ok(field)
    }
}

/// A point of the evolution: the curve plus both clocks.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub s: SupportField,
    /// Unnormalized flow time.
    pub t: f64,
    /// Normalized time τ = ∫ (π/A)^{2p/(p+2)} dξ.
    pub tau: f64,
    pub step_index: usize,
    pub last_dt: f64,
}

impl FlowState {
    pub fn new(s: SupportField) -> Self {
        FlowState {
            s,
            t: 0.0,
            tau: 0.0,
            step_index: 0,
            last_dt: 0.0,
        }
    }
}

/// Diagnostics of one accepted state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    pub tau: f64,
    pub area: f64,
    pub length: f64,
    pub omega_p_psi: f64,
    /// Ω_p^Ψ / A^{(2−p)/(2+p)}; nondecreasing along the flow.
    pub ratio: f64,
    /// min over the grid of Ψ s (κ/s³)^{p/(p+2)}; nondecreasing along the
    /// unnormalized flow.
    pub min_speed: f64,
    /// osc(log(Φ/σ)) with Φ = Ψ^{(p+2)/(3p)}; scale invariant.
    pub residual_osc: f64,
    pub aspect: f64,
    /// Step size that produced this state (0 for the initial row).
    pub dt: f64,
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    ResidualConverged,
    TimeLimit,
    StepLimit,
    AspectExceeded,
    AreaExtinguished,
    ConvexityLost { step: usize },
}

impl StopReason {
    pub fn is_convexity_lost(&self) -> bool {
        matches!(self, StopReason::ConvexityLost { .. })
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub stop: StopReason,
    pub final_state: FlowState,
}

impl FlowTrace {
    /// Extinction-time estimate from the last two rows, using the homothetic
    /// law that A^{2p/(p+2)} is asymptotically linear in t.
    pub fn extrapolated_extinction(&self, p: f64) -> Option<f64> {
        let n = self.rows.len();
        if n < 2 {
            return None;
        }
        let (r1, r2) = (&self.rows[n - 2], &self.rows[n - 1]);
        let e = 2.0 * p / (p + 2.0);
        let (u1, u2) = (r1.area.powf(e), r2.area.powf(e));
        if u1 <= u2 || r2.t <= r1.t {
            return None;
        }
        Some(r2.t + u2 * (r2.t - r1.t) / (u1 - u2))
    }
}

/// Everything the stepper needs, with Ψ pinned to the grid.
struct Engine {
    psi: Vec<f64>,
    p: f64,
    /// s-exponent 1 − 3p/(p+2).
    alpha: f64,
    /// 𝔯-exponent −p/(p+2).
    beta: f64,
    dt_safety: f64,
    r_min: f64,
    dtheta_sq: f64,
    /// (p+2)/(3p): log Ψ multiplier turning Ψ into Φ.
    phi_exponent: f64,
}

impl Engine {
    fn new(cfg: &FlowConfig, psi: Vec<f64>) -> Self {
        let p = cfg.p;
        let dtheta = 2.0 * PI / cfg.n_samples as f64;
        Engine {
            psi,
            p,
            alpha: 1.0 - 3.0 * p / (p + 2.0),
            beta: -p / (p + 2.0),
            dt_safety: cfg.dt_safety,
            r_min: cfg.r_min,
            dtheta_sq: dtheta * dtheta,
            phi_exponent: (p + 2.0) / (3.0 * p),
        }
    }

    /// 𝔯 of raw samples, failing when convexity (or positivity) is lost.
    fn radius(&self, values: &[f64], step: usize) -> std::result::Result<Vec<f64>, usize> {
        let mut r = spectral::derivative(values, 2);
        for (ri, &si) in r.iter_mut().zip(values) {
            *ri += si;
        }
        let min_r = spectral::min_max(&r).0;
        let min_s = spectral::min_max(values).0;
        if min_r <= self.r_min || min_s <= 0.0 {
            return Err(step);
        }
        Ok(r)
    }

    fn speed_from(&self, values: &[f64], r: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(r)
            .zip(&self.psi)
            .map(|((&s, &rv), &w)| w * s.powf(self.alpha) * rv.powf(self.beta))
            .collect()
    }

    /// Right-hand side s_t = −speed.
    fn rhs(&self, values: &[f64], step: usize) -> std::result::Result<Vec<f64>, usize> {
        let r = self.radius(values, step)?;
        Ok(self
            .speed_from(values, &r)
            .into_iter()
            .map(|v| -v)
            .collect())
    }

    /// Adaptive step size from the parabolic CFL and the 5% area cap.
    fn step_size(&self, values: &[f64], r: &[f64], area: f64, omega: f64) -> f64 {
        let q = self.p / (self.p + 2.0);
        let mut d_max = 0.0f64;
        for ((&s, &rv), &w) in values.iter().zip(r).zip(&self.psi) {
            let d = q * w * s.powf(self.alpha) * rv.powf(self.beta - 1.0);
            d_max = d_max.max(d);
        }
        let cfl = self.dt_safety * self.dtheta_sq / d_max;
        let area_cap = AREA_STEP_CAP * area / omega;
        cfl.min(area_cap)
    }

    /// One RK4 step of size dt with antipodal re-symmetrization.
    fn rk4(&self, state: &FlowState, dt: f64, area: f64) -> Result<FlowState> {
        let step = state.step_index;
        let s0 = state.s.values();
        let n = s0.len();
        let stage = |base: &[f64], k: &[f64], h: f64| -> Vec<f64> {
            base.iter().zip(k).map(|(&b, &kv)| b + h * kv).collect()
        };
        let lost = |step| Error::ConvexityLost { step };
        let k1 = self.rhs(s0, step).map_err(lost)?;
        let k2 = self
            .rhs(&stage(s0, &k1, 0.5 * dt), step)
            .map_err(lost)?;
        let k3 = self
            .rhs(&stage(s0, &k2, 0.5 * dt), step)
            .map_err(lost)?;
        let k4 = self.rhs(&stage(s0, &k3, dt), step).map_err(lost)?;
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            values.push(s0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        spectral::symmetrize(&mut values);
        // Accept only if the new curve is still a curve.
        self.radius(&values, step + 1).map_err(lost)?;
        let min = spectral::min_max(&values).0;
        if min <= 0.0 {
            return Err(Error::ConvexityLost { step: step + 1 });
        }
        Ok(FlowState {
            s: SupportField::from_symmetric_unchecked(values),
            t: state.t + dt,
            tau: state.tau + (PI / area).powf(2.0 * self.p / (self.p + 2.0)) * dt,
            step_index: step + 1,
            last_dt: dt,
        })
    }

    fn diagnostics(&self, state: &FlowState) -> Result<TraceRow> {
        let values = state.s.values();
        let r = self
            .radius(values, state.step_index)
            .map_err(|step| Error::ConvexityLost { step })?;
        let sr: Vec<f64> = values.iter().zip(&r).map(|(&a, &b)| a * b).collect();
        let area = 0.5 * spectral::quadrature(&sr);
        let length = spectral::quadrature(&r);
        let q = self.p / (self.p + 2.0);
        let weighted: Vec<f64> = sr
            .iter()
            .zip(values)
            .zip(&r)
            .zip(&self.psi)
            .map(|(((&srv, &s), &rv), &w)| w * srv * (1.0 / (rv * s * s * s)).powf(q))
            .collect();
        let omega_p_psi = spectral::quadrature(&weighted);
        let ratio = omega_p_psi / area.powf((2.0 - self.p) / (2.0 + self.p));
        let speed = self.speed_from(values, &r);
        let min_speed = spectral::min_max(&speed).0;
        // osc(log Φ − log σ) with Φ = Ψ^{(p+2)/(3p)}.
        let log_res: Vec<f64> = values
            .iter()
            .zip(&r)
            .zip(&self.psi)
            .map(|((&s, &rv), &w)| {
                self.phi_exponent * w.ln() - (s * rv.cbrt()).ln()
            })
            .collect();
        let residual_osc = spectral::oscillation(&log_res);
        Ok(TraceRow {
            step: state.step_index,
            t: state.t,
            tau: state.tau,
            area,
            length,
            omega_p_psi,
            ratio,
            min_speed,
            residual_osc,
            aspect: state.s.aspect(),
            dt: state.last_dt,
        })
    }
}

/// Pointwise speed Ψ s^{1−3p/(p+2)} 𝔯^{−p/(p+2)}; the support function moves
/// by s_t = −speed.
pub fn speed(s: &SupportField, cfg: &FlowConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if s.n_samples() != cfg.n_samples {
        return Err(Error::Grid {
            n: s.n_samples(),
            reason: "curve grid does not match the configured sample count",
        });
    }
    let engine = Engine::new(cfg, cfg.psi_field()?);
    let r = radius_of_curvature(s)?;
    Ok(engine.speed_from(s.values(), &r))
}

/// One adaptive RK4 step.
pub fn step(state: &FlowState, cfg: &FlowConfig) -> Result<FlowState> {
    cfg.validate()?;
    let engine = Engine::new(cfg, cfg.psi_field()?);
    let row = engine.diagnostics(state)?;
    let r = radius_of_curvature(&state.s)?;
    let dt = engine.step_size(state.s.values(), &r, row.area, row.omega_p_psi);
    engine.rk4(state, dt, row.area)
}

/// One RK4 step of a caller-chosen size (for convergence studies).
pub fn step_with_dt(state: &FlowState, cfg: &FlowConfig, dt: f64) -> Result<FlowState> {
    cfg.validate()?;
    let engine = Engine::new(cfg, cfg.psi_field()?);
    let row = engine.diagnostics(state)?;
    engine.rk4(state, dt, row.area)
}

/// Rescale to enclosed area π; both clocks are left untouched.
pub fn normalize(state: &FlowState) -> Result<FlowState> {
    let r = radius_of_curvature(&state.s)?;
    let sr: Vec<f64> = state.s.values().iter().zip(&r).map(|(&a, &b)| a * b).collect();
    let area = 0.5 * spectral::quadrature(&sr);
    let lambda = (PI / area).sqrt();
    Ok(FlowState {
        s: state.s.scaled(lambda),
        ..state.clone()
    })
}

/// Run the flow to one of its stopping conditions, recording a trace row per
/// accepted state (the initial state is row 0).
pub fn run(cfg: &FlowConfig, initial: &SupportField) -> Result<FlowTrace> {
    let psi = cfg.psi_field()?;
    run_with_weight(cfg, psi, initial, |_, _| {})
}

/// Like [`run`], with the weight given pointwise on the grid and an observer
/// called on every accepted (state, row) pair. Used by the solver, which
/// derives Ψ from the target and needs the intermediate curves.
pub fn run_with_weight(
    cfg: &FlowConfig,
    psi: Vec<f64>,
    initial: &SupportField,
    mut observer: impl FnMut(&FlowState, &TraceRow),
) -> Result<FlowTrace> {
    cfg.validate()?;
    if initial.n_samples() != cfg.n_samples {
        return Err(Error::Grid {
            n: initial.n_samples(),
            reason: "initial curve grid does not match the configured sample count",
        });
    }
    if psi.len() != cfg.n_samples {
        return Err(Error::Grid {
            n: psi.len(),
            reason: "weight grid does not match the configured sample count",
        });
    }
    let engine = Engine::new(cfg, psi);
    let mut state = FlowState::new(initial.clone());
    // Reject a non-convex initial curve outright.
    radius_of_curvature(initial)?;
    if cfg.normalize {
        state = normalize(&state)?;
    }
    let mut rows = Vec::new();
    let first = engine.diagnostics(&state)?;
    let initial_area = first.area;

    let mut row = first;
    let stop = loop {
        rows.push(row);
        observer(&state, &row);
        if cfg.stop_residual > 0.0 && row.residual_osc < cfg.stop_residual {
            break StopReason::ResidualConverged;
        }
        if row.aspect > cfg.aspect_max {
            break StopReason::AspectExceeded;
        }
        if !cfg.normalize && row.area < cfg.area_stop_frac * initial_area {
            break StopReason::AreaExtinguished;
        }
        if state.t >= cfg.t_max {
            break StopReason::TimeLimit;
        }
        if state.step_index >= cfg.max_steps {
            break StopReason::StepLimit;
        }
        let r = match engine.radius(state.s.values(), state.step_index) {
            Ok(r) => r,
            Err(step) => break StopReason::ConvexityLost { step },
        };
        let dt = engine.step_size(state.s.values(), &r, row.area, row.omega_p_psi);
        match engine.rk4(&state, dt, row.area) {
            Ok(next) => {
                state = next;
                if cfg.normalize {
                    state = normalize(&state)?;
                }
            }
            Err(Error::ConvexityLost { step }) => break StopReason::ConvexityLost { step },
            Err(other) => return Err(other),
        }
        row = match engine.diagnostics(&state) {
            Ok(r) => r,
            Err(Error::ConvexityLost { step }) => break StopReason::ConvexityLost { step },
            Err(other) => return Err(other),
        };
    };
    Ok(FlowTrace {
        rows,
        stop,
        final_state: state,
    })
}

/// Certified upper bound √A(0)/(δ√π) for the extinction time, with δ the
/// initial minimum speed.
pub fn extinction_bound(initial: &SupportField, cfg: &FlowConfig) -> Result<f64> {
    let speed = speed(initial, cfg)?;
    let delta = spectral::min_max(&speed).0;
    let r = radius_of_curvature(initial)?;
    let sr: Vec<f64> = initial.values().iter().zip(&r).map(|(&a, &b)| a * b).collect();
    let area = 0.5 * spectral::quadrature(&sr);
    Ok(area.sqrt() / (delta * PI.sqrt()))
}
