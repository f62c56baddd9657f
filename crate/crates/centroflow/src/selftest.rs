//! The invariant suite behind `centroflow selftest`.
//!
//! Each check re-verifies one of the provable properties of the toolkit on
//! deterministic random inputs: geometric invariants of sampled curves, the
//! flow's monotone quantities, the solver round trip, and the obstruction
//! closed forms. A fresh ChaCha stream per check keeps results independent of
//! check ordering.

use crate::curve::{self, FourierSpec};
use crate::error::Error;
use crate::flow::{self, FlowConfig, StopReason};
use crate::obstruction;
use crate::sampling;
use crate::solver::{self, SolveOptions, SolveStatus, TargetData};
use crate::spectral;
use crate::{affine, io};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

type CheckResult = Result<(), String>;

pub struct CheckOutcome {
    pub name: &'static str,
    pub error: Option<String>,
}

fn fail(msg: impl Into<String>) -> CheckResult {
    Err(msg.into())
}

fn ensure(cond: bool, msg: impl Into<String>) -> CheckResult {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn curve_invariants(rng: &mut ChaCha8Rng) -> CheckResult {
    for i in 0..20 {
        let s = sampling::random_convex_curve(rng, 128, 1);
        let g = curve::geometry(&s).map_err(|e| format!("curve {i}: {e}"))?;
        for j in 0..64 {
            if s.values()[j] != s.values()[j + 64] {
                return fail(format!("curve {i}: symmetry broken at {j}"));
            }
        }
        ensure(
            g.length * g.length >= 4.0 * PI * g.area - 1e-9,
            format!("curve {i}: isoperimetric inequality violated"),
        )?;
        for (j, (&r, &k)) in g.radius_of_curvature.iter().zip(&g.curvature).enumerate() {
            ensure(
                (r * k - 1.0).abs() < 1e-12,
                format!("curve {i}: kappa*r != 1 at {j}"),
            )?;
        }
    }
    Ok(())
}

fn spectral_algebra(rng: &mut ChaCha8Rng) -> CheckResult {
    let s = sampling::random_convex_curve(rng, 128, 1);
    let f = s.values();
    let g: Vec<f64> = spectral::grid(128).iter().map(|&t| (4.0 * t).sin()).collect();
    // Linearity.
    let combined: Vec<f64> = f.iter().zip(&g).map(|(&a, &b)| 2.0 * a + 3.0 * b).collect();
    let lhs = spectral::derivative(&combined, 1);
    let df = spectral::derivative(f, 1);
    let dg = spectral::derivative(&g, 1);
    for i in 0..128 {
        ensure(
            (lhs[i] - (2.0 * df[i] + 3.0 * dg[i])).abs() < 1e-11,
            "derivative is not linear",
        )?;
    }
    // Constants.
    let c = spectral::derivative(&vec![4.2; 128], 1);
    ensure(c.iter().all(|v| v.abs() < 1e-12), "derivative of constant")?;
    // Composition.
    let twice = spectral::derivative(&spectral::derivative(f, 1), 1);
    let second = spectral::derivative(f, 2);
    for i in 0..128 {
        ensure(
            (twice[i] - second[i]).abs() < 1e-12,
            "d2 differs from d∘d on band-limited field",
        )?;
    }
    Ok(())
}

fn sl2_action(rng: &mut ChaCha8Rng) -> CheckResult {
    for i in 0..10 {
        let s = sampling::random_convex_curve(rng, 256, 1);
        let t1 = sampling::random_sl2(rng);
        let t2 = sampling::random_sl2(rng);
        let a0 = curve::geometry(&s).map_err(|e| e.to_string())?.area;
        let s1 = curve::apply_sl2(&s, &t1).map_err(|e| e.to_string())?;
        let a1 = curve::geometry(&s1).map_err(|e| e.to_string())?.area;
        ensure(
            (a1 - a0).abs() < 1e-8 * a0.max(1.0),
            format!("map {i}: area not preserved ({a0} -> {a1})"),
        )?;
        let via_two = curve::apply_sl2(&s1, &t2).map_err(|e| e.to_string())?;
        let direct = curve::apply_sl2(&s, &t2.compose(&t1)).map_err(|e| e.to_string())?;
        ensure(
            io::max_abs_diff(via_two.values(), direct.values()) < 1e-8,
            format!("map {i}: composition mismatch"),
        )?;
    }
    Ok(())
}

fn john_and_coefficient_bounds(rng: &mut ChaCha8Rng) -> CheckResult {
    let bounds = curve::john_bounds(2).map_err(|e| e.to_string())?;
    for i in 0..100 {
        let s = sampling::random_area_pi_curve(rng, 128, 2);
        let (lo, hi) = spectral::min_max(s.values());
        ensure(
            lo >= bounds.s_lower && hi <= bounds.s_upper,
            format!("curve {i}: John bounds violated: [{lo}, {hi}]"),
        )?;
        let check = curve::fourier_coefficient_bound_check(&s, 2);
        ensure(
            check.pass,
            format!("curve {i}: coefficient bound ratio {}", check.worst_ratio),
        )?;
    }
    Ok(())
}

fn affine_identities(rng: &mut ChaCha8Rng) -> CheckResult {
    for i in 0..20 {
        let s = sampling::random_convex_curve(rng, 256, 1);
        let data = affine::affine_data(&s, 1.5, None).map_err(|e| e.to_string())?;
        let sigma_ss = affine::affine_derivative(&data.sigma, &s, 2).map_err(|e| e.to_string())?;
        for j in 0..256 {
            let defect = sigma_ss[j] + data.sigma[j] * data.mu[j] - 1.0;
            ensure(
                defect.abs() < 1e-8,
                format!("curve {i}: sigma_ss + sigma*mu - 1 = {defect} at {j}"),
            )?;
        }
        let lam = affine::lambda_curve(&s).map_err(|e| e.to_string())?;
        ensure(
            lam.closure_defect < 1e-10,
            format!("curve {i}: lambda closure {}", lam.closure_defect),
        )?;
        for j in 0..256 {
            let s3 = s.values()[j].powi(3);
            ensure(
                (lam.euclid_curvature[j] - s3).abs() < 1e-6,
                format!("curve {i}: kappa_lambda vs s^3 at {j}"),
            )?;
            ensure(
                (lam.affine_curvature[j] - data.sigma[j].powi(3)).abs() < 1e-6,
                format!("curve {i}: mu_lambda vs sigma^3 at {j}"),
            )?;
        }
    }
    Ok(())
}

fn p_affine_isoperimetric(rng: &mut ChaCha8Rng) -> CheckResult {
    use rand::Rng as _;
    for i in 0..20 {
        let p = rng.random_range(1.05..1.95);
        let s = sampling::random_convex_curve(rng, 128, 1);
        let g = curve::geometry(&s).map_err(|e| e.to_string())?;
        let data = affine::affine_data(&s, p, None).map_err(|e| e.to_string())?;
        let lhs = data.omega_p.powf(2.0 + p);
        let rhs = 2.0f64.powf(2.0 + p) * PI.powf(2.0 * p) * g.area.powf(2.0 - p);
        ensure(
            lhs <= rhs * (1.0 + 1e-10),
            format!("curve {i}: p-affine isoperimetric violated at p={p}"),
        )?;
    }
    // Ellipses are the equality case.
    let values: Vec<f64> = spectral::grid(256)
        .into_iter()
        .map(|t| {
            let (sn, cs) = t.sin_cos();
            (4.0 * cs * cs + 0.25 * sn * sn).sqrt()
        })
        .collect();
    let e = curve::SupportField::new(values).map_err(|e| e.to_string())?;
    let g = curve::geometry(&e).map_err(|e| e.to_string())?;
    let data = affine::affine_data(&e, 1.5, None).map_err(|e| e.to_string())?;
    let lhs = data.omega_p.powf(3.5);
    let rhs = 2.0f64.powf(3.5) * PI.powf(3.0) * g.area.powf(0.5);
    ensure(
        (lhs / rhs - 1.0).abs() < 1e-8,
        format!("ellipse equality off by {}", lhs / rhs - 1.0),
    )
}

fn eight_critical_points(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut checked = 0;
    while checked < 50 {
        let s = sampling::random_convex_curve(rng, 256, 1);
        let sigma = affine::sigma_field(&s).map_err(|e| e.to_string())?;
        match affine::count_critical_points(&sigma) {
            affine::CriticalPoints::Degenerate => continue,
            affine::CriticalPoints::Counted(c) => {
                ensure(
                    c.count >= 8,
                    format!("sigma with {} critical points (locations {:?})", c.count, c.locations),
                )?;
                checked += 1;
            }
        }
    }
    Ok(())
}

fn circle_extinction(_rng: &mut ChaCha8Rng) -> CheckResult {
    let cfg = FlowConfig::new(1.5, FourierSpec::constant(1.0));
    let mut cfg = cfg;
    cfg.n_samples = 128;
    let circle = curve::synthesize(&FourierSpec::constant(1.0), 128).map_err(|e| e.to_string())?;
    let trace = flow::run(&cfg, &circle).map_err(|e| e.to_string())?;
    ensure(
        trace.stop == StopReason::AreaExtinguished,
        format!("stop reason {:?}", trace.stop),
    )?;
    let t_ext = trace
        .extrapolated_extinction(1.5)
        .ok_or("no extinction estimate")?;
    let exact = 7.0 / 12.0;
    ensure(
        (t_ext - exact).abs() < 0.01 * exact,
        format!("extinction {t_ext} vs {exact}"),
    )?;
    let bound = flow::extinction_bound(&circle, &cfg).map_err(|e| e.to_string())?;
    ensure(t_ext <= bound + 1e-9, format!("estimate {t_ext} above bound {bound}"))?;
    let r0 = trace.rows[0].ratio;
    for row in &trace.rows {
        ensure(
            (row.ratio - r0).abs() <= 1e-9 * r0.abs(),
            format!("circle ratio drifted at step {}", row.step),
        )?;
        ensure(
            row.aspect - 1.0 < 1e-10,
            format!("circle grew an oscillation at step {}", row.step),
        )?;
    }
    let s = trace.final_state.s;
    ensure(
        spectral::oscillation(s.values()) / spectral::mean(s.values()) < 1e-10,
        "circle did not stay a circle",
    )
}

fn area_law(_rng: &mut ChaCha8Rng) -> CheckResult {
    let mut cfg = FlowConfig::new(1.5, FourierSpec::cosine(1.0, 1, 0.2));
    cfg.n_samples = 128;
    let s = curve::synthesize(&FourierSpec::cosine(1.0, 1, 0.08), 128).map_err(|e| e.to_string())?;
    let state = flow::FlowState::new(s);
    let row0 = {
        let trace = flow::run_with_weight(
            &{
                let mut c = cfg.clone();
                c.max_steps = 0;
                c
            },
            cfg.psi_field().map_err(|e| e.to_string())?,
            &state.s,
            |_, _| {},
        )
        .map_err(|e| e.to_string())?;
        trace.rows[0]
    };
    let defect = |dt: f64| -> Result<f64, Error> {
        let next = flow::step_with_dt(&state, &cfg, dt)?;
        let g = curve::geometry(&next.s)?;
        Ok((g.area - row0.area + row0.omega_p_psi * dt).abs())
    };
    let d1 = defect(2e-3).map_err(|e| e.to_string())?;
    let d2 = defect(1e-3).map_err(|e| e.to_string())?;
    ensure(
        d1 / d2 >= 3.5,
        format!("area-law defect ratio {} (d1={d1}, d2={d2})", d1 / d2),
    )?;
    // Central-difference dA/dt against -Ω_p^Ψ.
    let dt = 1e-3;
    let s1 = flow::step_with_dt(&state, &cfg, dt).map_err(|e| e.to_string())?;
    let s2 = flow::step_with_dt(&s1, &cfg, dt).map_err(|e| e.to_string())?;
    let a0 = row0.area;
    let a2 = curve::geometry(&s2.s).map_err(|e| e.to_string())?.area;
    let mid = flow::run_with_weight(
        &{
            let mut c = cfg.clone();
            c.max_steps = 0;
            c
        },
        cfg.psi_field().map_err(|e| e.to_string())?,
        &s1.s,
        |_, _| {},
    )
    .map_err(|e| e.to_string())?
    .rows[0];
    let fd = (a2 - a0) / (2.0 * dt);
    let rel = (fd + mid.omega_p_psi).abs() / mid.omega_p_psi.abs();
    ensure(rel < 1e-4, format!("dA/dt vs -omega relative error {rel}"))
}

fn monotone_quantities(rng: &mut ChaCha8Rng) -> CheckResult {
    for i in 0..8 {
        for constant_weight in [true, false] {
            let psi = if constant_weight {
                FourierSpec::constant(1.0)
            } else {
                sampling::random_weight_spec(rng, 1)
            };
            let mut cfg = FlowConfig::new(1.5, psi);
            cfg.n_samples = 128;
            cfg.max_steps = 100_000;
            let s = sampling::random_convex_curve(rng, 128, 1);
            let trace = flow::run(&cfg, &s).map_err(|e| e.to_string())?;
            ensure(
                trace.stop == StopReason::AreaExtinguished,
                format!("seed {i}: run ended early: {:?}", trace.stop),
            )?;
            for w in trace.rows.windows(2) {
                ensure(
                    w[1].min_speed >= w[0].min_speed - 1e-9,
                    format!("seed {i}: min speed dropped at step {}", w[1].step),
                )?;
                ensure(
                    w[1].ratio >= w[0].ratio - 1e-9,
                    format!("seed {i}: weighted ratio dropped at step {}", w[1].step),
                )?;
            }
        }
    }
    Ok(())
}

fn periodicity_preservation(rng: &mut ChaCha8Rng) -> CheckResult {
    for k in [2u32, 3] {
        let mut cfg = FlowConfig::new(1.5, sampling::random_weight_spec(rng, k));
        cfg.n_samples = 128;
        let s = sampling::random_convex_curve(rng, 128, k);
        let psi = cfg.psi_field().map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        let trace = flow::run_with_weight(&cfg, psi, &s, |state, _| {
            let ratio = spectral::off_lattice_energy_ratio(state.s.values(), 2 * k as usize);
            worst = worst.max(ratio);
        })
        .map_err(|e| e.to_string())?;
        ensure(
            trace.stop == StopReason::AreaExtinguished,
            format!("k={k}: run ended early: {:?}", trace.stop),
        )?;
        ensure(
            worst < 1e-9,
            format!("k={k}: off-lattice energy reached {worst}"),
        )?;
    }
    Ok(())
}

fn solve_round_trip(rng: &mut ChaCha8Rng) -> CheckResult {
    let n = 128;
    // The pinned generator plus random π/2-periodic ones.
    let mut generators =
        vec![curve::synthesize(&FourierSpec::cosine(1.0, 2, 0.05), n).map_err(|e| e.to_string())?];
    for _ in 0..3 {
        generators.push(sampling::random_convex_curve(rng, n, 2));
    }
    for (i, generator) in generators.iter().enumerate() {
        let phi = solver::forward(generator).map_err(|e| e.to_string())?;
        let target = TargetData::from_field(phi, 1.5).map_err(|e| e.to_string())?;
        ensure(
            target.k.is_at_least(2),
            format!("generator {i}: detected k {:?}", target.k),
        )?;
        let opts = SolveOptions {
            n_samples: n,
            ..Default::default()
        };
        let report = solver::solve(&target, &opts).map_err(|e| e.to_string())?;
        ensure(
            report.status == SolveStatus::Converged,
            format!("generator {i}: status {:?}", report.status),
        )?;
        let diff = io::max_abs_diff(report.best_s.values(), generator.values());
        ensure(
            diff < 5e-3,
            format!("generator {i}: recovered curve off by {diff:.2e}"),
        )?;
        // KW integrals vanish for the recovered solution.
        let kw = obstruction::kazdan_warner(&target.phi, &report.best_s);
        ensure(
            kw.iter().all(|v| v.abs() < 1e-4),
            format!("generator {i}: KW integrals {kw:?}"),
        )?;
    }
    Ok(())
}

fn approximating_family(_rng: &mut ChaCha8Rng) -> CheckResult {
    // Desk-scale slice of the k=1 degeneration: the status, the strictly
    // decreasing snapshot residuals and the failed necessary condition are
    // checkable in seconds; the deep small-residual regime is not (the CFL
    // step collapses), so that part lives with the acceptance suite.
    let n = 128;
    let target =
        TargetData::new(&FourierSpec::cosine(2.0, 1, 1.0), 1.5, n).map_err(|e| e.to_string())?;
    let opts = SolveOptions {
        n_samples: n,
        max_steps: 250_000,
        ..Default::default()
    };
    let report = solver::solve(&target, &opts).map_err(|e| e.to_string())?;
    ensure(
        report.status == SolveStatus::ApproximatingFamily,
        format!("status {:?}", report.status),
    )?;
    for w in report.snapshots.windows(2) {
        ensure(
            w[1].residual_sup < w[0].residual_sup,
            "snapshot residuals are not strictly decreasing",
        )?;
    }
    let first = report.trace.rows.first().map(|r| r.residual_osc).unwrap_or(0.0);
    ensure(
        report.residual_osc < 0.5 * first,
        format!("residual did not improve: {} vs {first}", report.residual_osc),
    )?;
    let final_aspect = report.trace.rows.last().map(|r| r.aspect).unwrap_or(0.0);
    ensure(final_aspect > 3.0, format!("no degeneration: aspect {final_aspect}"))?;
    let nc = obstruction::necessary_condition(&target.phi);
    ensure(!nc.pass, "2+cos2θ must fail the critical-point condition")
}

fn obstruction_closed_forms(_rng: &mut ChaCha8Rng) -> CheckResult {
    let phi: Vec<f64> = spectral::grid(256)
        .into_iter()
        .map(|t| 2.0 + (2.0 * t).cos())
        .collect();
    let b = obstruction::b_field(&phi, 128);
    for (i, &bv) in b.iter().enumerate() {
        let x = i as f64 * PI / 128.0;
        let expected = -2.0 * PI * (2.0 * x).cos();
        ensure(
            (bv - expected).abs() < 1e-6,
            format!("B({x}) = {bv}, expected {expected}"),
        )?;
    }
    ensure(
        obstruction::winding_number(&phi).map_err(|e| e.to_string())? == -1,
        "winding of 2+cos2x",
    )?;
    let constant = vec![1.5; 256];
    let bc = obstruction::b_field(&constant, 128);
    ensure(bc.iter().all(|v| v.abs() < 1e-12), "B of constant")?;
    let u = curve::synthesize(&FourierSpec::constant(1.0), 256).map_err(|e| e.to_string())?;
    let kw = obstruction::kazdan_warner(&constant, &u);
    ensure(kw.iter().all(|v| v.abs() < 1e-12), "KW of constant")
}

fn sl2_forward_consistency(rng: &mut ChaCha8Rng) -> CheckResult {
    let s = curve::synthesize(&FourierSpec::cosine(1.0, 2, 0.05), 256).map_err(|e| e.to_string())?;
    for i in 0..10 {
        let map = sampling::random_sl2(rng);
        let (s2, phi_t) = solver::sl2_solution_orbit(&s, &map).map_err(|e| e.to_string())?;
        let phi2 = solver::forward(&s2).map_err(|e| e.to_string())?;
        ensure(
            io::max_abs_diff(&phi2, &phi_t) < 1e-6,
            format!("map {i}: forward/orbit mismatch"),
        )?;
    }
    Ok(())
}

fn output_determinism(_rng: &mut ChaCha8Rng) -> CheckResult {
    let mut cfg = FlowConfig::new(1.5, FourierSpec::constant(1.0));
    cfg.n_samples = 64;
    cfg.max_steps = 50;
    let s = curve::synthesize(&FourierSpec::cosine(1.0, 1, 0.05), 64).map_err(|e| e.to_string())?;
    let run = || -> Result<String, String> {
        let trace = flow::run(&cfg, &s).map_err(|e| e.to_string())?;
        Ok(io::trace_csv(&trace))
    };
    ensure(run()? == run()?, "identical runs produced different traces")
}

type Check = (&'static str, fn(&mut ChaCha8Rng) -> CheckResult);

const CHECKS: &[Check] = &[
    ("curve.invariants", curve_invariants),
    ("curve.spectral_algebra", spectral_algebra),
    ("curve.sl2_action", sl2_action),
    ("curve.john_coefficient_bounds", john_and_coefficient_bounds),
    ("affine.identity_battery", affine_identities),
    ("affine.p_isoperimetric", p_affine_isoperimetric),
    ("affine.eight_critical_points", eight_critical_points),
    ("flow.circle_extinction", circle_extinction),
    ("flow.area_law", area_law),
    ("flow.monotone_quantities", monotone_quantities),
    ("flow.periodicity_preservation", periodicity_preservation),
    ("solver.round_trip", solve_round_trip),
    ("solver.approximating_family", approximating_family),
    ("obstruction.closed_forms", obstruction_closed_forms),
    ("solver.sl2_consistency", sl2_forward_consistency),
    ("cli.determinism", output_determinism),
];

/// Run every check, logging one line each; returns the outcomes.
pub fn run_all(seed: u64, mut log: impl FnMut(&str)) -> Vec<CheckOutcome> {
    let mut outcomes = Vec::new();
    for (idx, (name, check)) in CHECKS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
        let result = check(&mut rng);
        match &result {
            Ok(()) => log(&format!("PASS {name}")),
            Err(e) => log(&format!("FAIL {name}: {e}")),
        }
        outcomes.push(CheckOutcome {
            name,
            error: result.err(),
        });
    }
    outcomes
}
