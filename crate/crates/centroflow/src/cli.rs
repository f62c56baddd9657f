//! Batch front-end: one TOML/JSON config file per experiment, subcommands for
//! the flow, the solver, the forward problem and the diagnostics, plus the
//! self-test suite. Outputs go to a per-experiment directory as CSV traces,
//! curve dumps and JSON summaries.
//!
//! Exit codes: 0 for success or any graceful flow termination, 1 when the
//! self-test suite finds a broken invariant, 2 for config errors.

use crate::curve::{self, FourierSpec, SupportField};
use crate::flow::{self, FlowConfig, StopReason};
use crate::obstruction;
use crate::selftest;
use crate::solver::{self, SolveOptions, TargetData};
use crate::{io, spectral};
use serde::Deserialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

/// Worker-count cap for batches of experiments.
pub const THREADS_ENV: &str = "CENTROFLOW_THREADS";

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Curve for `evolve`/`forward`.
    pub initial: Option<FourierSpec>,
    /// Weight Ψ for `evolve` (defaults to 1).
    pub weight: Option<FourierSpec>,
    /// Target Φ for `solve`/`diagnose`.
    pub target: Option<FourierSpec>,
    /// Claimed solution for `diagnose` (drives the Kazdan-Warner integrals).
    pub solution: Option<FourierSpec>,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub output: OutputSection,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub p: Option<f64>,
    pub n_samples: Option<usize>,
    pub dt_safety: Option<f64>,
    pub t_max: Option<f64>,
    pub max_steps: Option<usize>,
    pub normalize: Option<bool>,
    pub stop_residual: Option<f64>,
    pub aspect_max: Option<f64>,
    pub r_min: Option<f64>,
    pub area_stop_frac: Option<f64>,
    pub seed_epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// Dump the evolving curve every this many steps (0 = final only).
    pub dump_every: Option<usize>,
}

/// A config error carries the message shown to the user (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CliResult<T> = Result<T, ConfigError>;

fn config_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl ExperimentConfig {
    /// Parse TOML or JSON, dispatching on the file extension (TOML otherwise).
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        let cfg: ExperimentConfig = if is_json {
            serde_json::from_str(&text)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
        };
        cfg.validate().map_err(|e| {
            config_err(format!("{}: {e}", path.display()))
        })?;
        Ok(cfg)
    }

    /// Range checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(p) = self.flow.p {
            if !(p > 1.0 && p < 2.0) {
                return Err(format!("flow.p = {p} violates the (1, 2) constraint"));
            }
        }
        if let Some(n) = self.flow.n_samples {
            if n < 8 || n % 4 != 0 {
                return Err(format!(
                    "flow.n_samples = {n} must be divisible by 4 and at least 8"
                ));
            }
        }
        for (name, v) in [
            ("flow.dt_safety", self.flow.dt_safety),
            ("flow.t_max", self.flow.t_max),
            ("flow.stop_residual", self.flow.stop_residual),
            ("flow.r_min", self.flow.r_min),
            ("flow.seed_epsilon", self.flow.seed_epsilon),
        ] {
            if let Some(v) = v {
                if !v.is_finite() && name != "flow.t_max" {
                    return Err(format!("{name} = {v} must be finite"));
                }
                if v < 0.0 {
                    return Err(format!("{name} = {v} must be nonnegative"));
                }
            }
        }
        if let Some(a) = self.flow.aspect_max {
            if a <= 1.0 {
                return Err(format!("flow.aspect_max = {a} must exceed 1"));
            }
        }
        if let Some(f) = self.flow.area_stop_frac {
            if !(0.0..1.0).contains(&f) {
                return Err(format!("flow.area_stop_frac = {f} must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    fn flow_config(&self) -> CliResult<FlowConfig> {
        let p = self
            .flow
            .p
            .ok_or_else(|| config_err("missing flow.p (required, in (1, 2))"))?;
        let psi = self.weight.clone().unwrap_or(FourierSpec::constant(1.0));
        let mut cfg = FlowConfig::new(p, psi);
        if let Some(n) = self.flow.n_samples {
            cfg.n_samples = n;
        }
        if let Some(v) = self.flow.dt_safety {
            cfg.dt_safety = v;
        }
        if let Some(v) = self.flow.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = self.flow.max_steps {
            cfg.max_steps = v;
        }
        if let Some(v) = self.flow.normalize {
            cfg.normalize = v;
        }
        if let Some(v) = self.flow.stop_residual {
            cfg.stop_residual = v;
        }
        if let Some(v) = self.flow.aspect_max {
            cfg.aspect_max = v;
        }
        if let Some(v) = self.flow.r_min {
            cfg.r_min = v;
        }
        if let Some(v) = self.flow.area_stop_frac {
            cfg.area_stop_frac = v;
        }
        cfg.validate()
            .map_err(|e| config_err(format!("flow section: {e}")))?;
        Ok(cfg)
    }

    fn solve_options(&self) -> CliResult<(f64, SolveOptions)> {
        let p = self
            .flow
            .p
            .ok_or_else(|| config_err("missing flow.p (required, in (1, 2))"))?;
        let mut opts = SolveOptions::default();
        if let Some(n) = self.flow.n_samples {
            opts.n_samples = n;
        }
        if let Some(v) = self.flow.dt_safety {
            opts.dt_safety = v;
        }
        if let Some(v) = self.flow.t_max {
            opts.t_max = v;
        }
        if let Some(v) = self.flow.max_steps {
            opts.max_steps = v;
        }
        if let Some(v) = self.flow.stop_residual {
            opts.stop_residual = v;
        }
        if let Some(v) = self.flow.aspect_max {
            opts.aspect_max = v;
        }
        if let Some(v) = self.flow.r_min {
            opts.r_min = v;
        }
        if let Some(v) = self.flow.seed_epsilon {
            opts.seed_epsilon = v;
        }
        Ok((p, opts))
    }

    fn initial_curve(&self, n_samples: usize) -> CliResult<SupportField> {
        let spec = self
            .initial
            .as_ref()
            .ok_or_else(|| config_err("missing [initial] curve section"))?;
        curve::synthesize(spec, n_samples).map_err(|e| config_err(format!("initial curve: {e}")))
    }
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    write(
        path,
        &(serde_json::to_string_pretty(value).expect("value serializes") + "\n"),
    )
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| config_err(format!("{}: {e}", dir.display())))
}

fn stop_reason_str(stop: StopReason) -> String {
    match stop {
        StopReason::ResidualConverged => "residual_converged".into(),
        StopReason::TimeLimit => "time_limit".into(),
        StopReason::StepLimit => "step_limit".into(),
        StopReason::AspectExceeded => "aspect_exceeded".into(),
        StopReason::AreaExtinguished => "area_extinguished".into(),
        StopReason::ConvexityLost { step } => format!("convexity_lost_at_step_{step}"),
    }
}

/// Run the flow described by the config and dump trace, curves and summary.
pub fn cmd_evolve(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    let flow_cfg = cfg.flow_config()?;
    let initial = cfg.initial_curve(flow_cfg.n_samples)?;
    ensure_dir(out_dir)?;
    let dump_every = cfg.output.dump_every.unwrap_or(0);

    let psi = flow_cfg
        .psi_field()
        .map_err(|e| config_err(format!("weight: {e}")))?;
    let mut dumps: Vec<(usize, SupportField)> = Vec::new();
    let trace = flow::run_with_weight(&flow_cfg, psi, &initial, |state, row| {
        if dump_every > 0 && row.step % dump_every == 0 {
            dumps.push((row.step, state.s.clone()));
        }
    })
    .map_err(|e| config_err(format!("flow failed to start: {e}")))?;

    write(&out_dir.join("trace.csv"), &io::trace_csv(&trace))?;
    for (step, s) in &dumps {
        let csv = io::curve_csv(s).map_err(|e| config_err(e.to_string()))?;
        write(&out_dir.join(format!("curve_{step:06}.csv")), &csv)?;
    }
    let final_csv =
        io::curve_csv(&trace.final_state.s).map_err(|e| config_err(e.to_string()))?;
    write(&out_dir.join("curve_final.csv"), &final_csv)?;

    let bound = flow::extinction_bound(&initial, &flow_cfg).ok();
    let last = trace.rows.last().expect("trace has at least the initial row");
    let summary = json!({
        "stop_reason": stop_reason_str(trace.stop),
        "n_steps": last.step,
        "t_final": last.t,
        "tau_final": last.tau,
        "area_final": last.area,
        "length_final": last.length,
        "aspect_final": last.aspect,
        "residual_osc_final": last.residual_osc,
        "extinction_estimate": trace.extrapolated_extinction(flow_cfg.p),
        "extinction_bound": bound,
    });
    write_json(&out_dir.join("summary.json"), &summary)
}

/// Solve the configured target and write the report plus snapshots.
pub fn cmd_solve(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    let (p, opts) = cfg.solve_options()?;
    let spec = cfg
        .target
        .as_ref()
        .ok_or_else(|| config_err("missing [target] section with the Φ series"))?;
    let target = TargetData::new(spec, p, opts.n_samples)
        .map_err(|e| config_err(format!("target: {e}")))?;
    ensure_dir(out_dir)?;
    let report = solver::solve(&target, &opts).map_err(|e| config_err(e.to_string()))?;
    io::write_solve_report(&report, out_dir)
        .map_err(|e| config_err(format!("{}: {e}", out_dir.display())))?;
    Ok(())
}

/// Emit Φ = forward(initial) as a curve dump plus a JSON summary.
pub fn cmd_forward(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    let n = cfg.flow.n_samples.unwrap_or(256);
    let initial = cfg.initial_curve(n)?;
    let phi = solver::forward(&initial).map_err(|e| config_err(e.to_string()))?;
    ensure_dir(out_dir)?;
    let csv = io::curve_csv(&initial).map_err(|e| config_err(e.to_string()))?;
    write(&out_dir.join("forward.csv"), &csv)?;
    let (lo, hi) = spectral::min_max(&phi);
    let spec = FourierSpec::analyze(&phi, 1e-14);
    let summary = json!({
        "k": curve::detect_periodicity(&phi).to_string(),
        "phi_min": lo,
        "phi_max": hi,
        "fourier": {"a0": spec.a0, "cos": spec.cos, "sin": spec.sin},
    });
    write_json(&out_dir.join("forward.json"), &summary)
}

/// Obstruction diagnostics for the configured target.
pub fn cmd_diagnose(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<()> {
    let n = cfg.flow.n_samples.unwrap_or(256);
    let spec = cfg
        .target
        .as_ref()
        .ok_or_else(|| config_err("missing [target] section with the Φ series"))?;
    let phi = spec
        .sample_symmetric(n)
        .map_err(|e| config_err(format!("target: {e}")))?;
    if spectral::min_max(&phi).0 <= 0.0 {
        return Err(config_err("target: Φ must be strictly positive"));
    }
    let solution = match &cfg.solution {
        Some(s) => Some(
            curve::synthesize(s, n).map_err(|e| config_err(format!("solution: {e}")))?,
        ),
        None => None,
    };
    let report = obstruction::diagnose(&phi, solution.as_ref())
        .map_err(|e| config_err(e.to_string()))?;
    ensure_dir(out_dir)?;
    write_json(&out_dir.join("diagnose.json"), &io::diagnose_json(&report))?;
    let mut csv = String::from("x,b\n");
    for (i, &bv) in report.b_values.iter().enumerate() {
        let x = i as f64 * std::f64::consts::PI / report.b_values.len() as f64;
        csv.push_str(&format!("{},{}\n", io::fmt_float(x), io::fmt_float(bv)));
    }
    write(&out_dir.join("b_field.csv"), &csv)
}

/// Run the invariant suite; returns false when any check fails.
pub fn cmd_selftest(seed: u64, out_dir: &Path) -> CliResult<bool> {
    ensure_dir(out_dir)?;
    let mut lines = Vec::new();
    let outcomes = selftest::run_all(seed, |line| {
        println!("{line}");
        lines.push(line.to_string());
    });
    let all_pass = outcomes.iter().all(|o| o.error.is_none());
    let results: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| {
            json!({
                "name": o.name,
                "pass": o.error.is_none(),
                "detail": o.error,
            })
        })
        .collect();
    write_json(
        &out_dir.join("selftest.json"),
        &json!({"seed": seed, "all_pass": all_pass, "results": results}),
    )?;
    Ok(all_pass)
}

/// Worker cap: CENTROFLOW_THREADS, else available parallelism.
pub fn worker_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Run one command over a batch of experiment configs on a bounded pool.
/// Returns the process exit code.
pub fn run_batch(
    command: &str,
    configs: &[PathBuf],
    out_flag: Option<&Path>,
    seed_flag: Option<u64>,
) -> i32 {
    let mut jobs: Vec<(PathBuf, ExperimentConfig, PathBuf)> = Vec::new();
    for path in configs {
        let cfg = match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config error: {e}");
                return EXIT_CONFIG_ERROR;
            }
        };
        let base: PathBuf = out_flag
            .map(Path::to_path_buf)
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        // A batch gets one subdirectory per experiment to avoid write contention.
        let dir = if configs.len() > 1 {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "experiment".into());
            base.join(stem)
        } else {
            base
        };
        jobs.push((path.clone(), cfg, dir));
    }

    if command == "selftest" {
        let seed = seed_flag
            .or_else(|| jobs.first().and_then(|(_, c, _)| c.seed))
            .unwrap_or(0);
        let dir = jobs
            .first()
            .map(|(_, _, d)| d.clone())
            .or_else(|| out_flag.map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from("out"));
        return match cmd_selftest(seed, &dir) {
            Ok(true) => EXIT_OK,
            Ok(false) => EXIT_INVARIANT_FAILURE,
            Err(e) => {
                eprintln!("config error: {e}");
                EXIT_CONFIG_ERROR
            }
        };
    }

    let next = AtomicUsize::new(0);
    let failures = AtomicUsize::new(0);
    let workers = worker_cap().min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= jobs.len() {
                    break;
                }
                let (path, cfg, dir) = &jobs[idx];
                let result = match command {
                    "evolve" => cmd_evolve(cfg, dir),
                    "solve" => cmd_solve(cfg, dir),
                    "forward" => cmd_forward(cfg, dir),
                    "diagnose" => cmd_diagnose(cfg, dir),
                    other => Err(config_err(format!("unknown command {other}"))),
                };
                if let Err(e) = result {
                    eprintln!("{}: {e}", path.display());
                    failures.fetch_add(1, Ordering::Relaxed);
                }
            });
        }
    });
    if failures.load(Ordering::Relaxed) > 0 {
        EXIT_CONFIG_ERROR
    } else {
        EXIT_OK
    }
}
