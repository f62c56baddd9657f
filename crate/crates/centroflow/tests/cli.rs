//! End-to-end checks of the batch front-end: config parsing, output files,
//! determinism, exit codes.

use centroflow::cli::{self, ExperimentConfig};
use std::fs;
use std::path::Path;

fn load_from_str(text: &str, dir: &Path) -> ExperimentConfig {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    ExperimentConfig::load(&path).unwrap()
}

#[test]
fn evolve_writes_trace_curves_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = load_from_str(
        r#"
        [initial]
        a0 = 1.0

        [flow]
        p = 1.5
        n_samples = 64

        [output]
        dump_every = 200
        "#,
        tmp.path(),
    );
    let out = tmp.path().join("run");
    cli::cmd_evolve(&cfg, &out).unwrap();
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with(
        "step,t,tau,area,length,omega_p_psi,ratio,min_speed,residual_osc,aspect,dt\n"
    ));
    assert!(out.join("curve_final.csv").exists());
    assert!(out.join("curve_000000.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["stop_reason"], "area_extinguished");
    // Circle extinction estimate lands within 1% of 7/12.
    let est = summary["extinction_estimate"].as_f64().unwrap();
    assert!((est - 7.0 / 12.0).abs() < 0.01 * 7.0 / 12.0, "estimate {est}");
    let bound = summary["extinction_bound"].as_f64().unwrap();
    assert!((bound - 1.0).abs() < 1e-12);
}

#[test]
fn evolve_outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = load_from_str(
        r#"
        seed = 7

        [initial]
        a0 = 1.0
        cos = [0.05]

        [flow]
        p = 1.5
        n_samples = 64
        max_steps = 200
        "#,
        tmp.path(),
    );
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    cli::cmd_evolve(&cfg, &out1).unwrap();
    cli::cmd_evolve(&cfg, &out2).unwrap();
    for name in ["trace.csv", "curve_final.csv", "summary.json"] {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn normalized_evolve_keeps_area_pi() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = load_from_str(
        r#"
        [initial]
        a0 = 1.0
        cos = [0.0, 0.03]

        [flow]
        p = 1.5
        n_samples = 64
        normalize = true
        max_steps = 500
        "#,
        tmp.path(),
    );
    let out = tmp.path().join("run");
    cli::cmd_evolve(&cfg, &out).unwrap();
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    for line in trace.lines().skip(1) {
        let area: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((area - std::f64::consts::PI).abs() < 1e-10);
    }
}

#[test]
fn solve_writes_report_and_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = load_from_str(
        r#"
        [target]
        a0 = 1.0

        [flow]
        p = 1.5
        n_samples = 64
        "#,
        tmp.path(),
    );
    let out = tmp.path().join("run");
    cli::cmd_solve(&cfg, &out).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "Converged");
    assert!(report["residual_sup"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["k"], "inf");
    // Snapshot curve refs point at files that exist and parse back.
    for snap in report["snapshots"].as_array().unwrap() {
        let name = snap["curve_ref"].as_str().unwrap();
        let text = fs::read_to_string(out.join(name)).unwrap();
        centroflow::io::parse_curve_csv(&text).unwrap();
    }
    assert!(out.join("best_s.csv").exists());
    assert!(out.join("trace.csv").exists());
}

#[test]
fn forward_and_diagnose_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = load_from_str(
        r#"
        [initial]
        a0 = 1.0
        cos = [0.0, 0.05]

        [target]
        a0 = 2.0
        cos = [1.0]

        [flow]
        p = 1.5
        n_samples = 128
        "#,
        tmp.path(),
    );
    let out = tmp.path().join("fwd");
    cli::cmd_forward(&cfg, &out).unwrap();
    let fwd: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("forward.json")).unwrap()).unwrap();
    assert_eq!(fwd["k"], "2");
    // The sigma column of the curve dump is Φ; it parses back as a field.
    let text = fs::read_to_string(out.join("forward.csv")).unwrap();
    centroflow::io::parse_curve_csv(&text).unwrap();

    let out = tmp.path().join("diag");
    cli::cmd_diagnose(&cfg, &out).unwrap();
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("diagnose.json")).unwrap()).unwrap();
    assert_eq!(diag["winding"], -1);
    assert_eq!(diag["n_critical"], 4);
    assert_eq!(diag["necessary_condition_pass"], false);
    assert_eq!(diag["theorem_b_applicable"], false);
    assert!(out.join("b_field.csv").exists());
}

#[test]
fn config_errors_cite_the_constraint() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(
        &path,
        r#"
        [flow]
        p = 2.5
        "#,
    )
    .unwrap();
    let err = ExperimentConfig::load(&path).unwrap_err();
    assert!(err.to_string().contains("(1, 2)"), "message: {err}");
}

#[test]
fn run_batch_reports_config_error_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(&path, "[flow]\np = 2.5\n").unwrap();
    let code = cli::run_batch("evolve", &[path], Some(tmp.path()), None);
    assert_eq!(code, cli::EXIT_CONFIG_ERROR);
}

#[test]
fn run_batch_executes_multiple_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (i, eps) in [0.02, 0.04].iter().enumerate() {
        let path = tmp.path().join(format!("exp{i}.toml"));
        fs::write(
            &path,
            format!(
                "[initial]\na0 = 1.0\ncos = [{eps}]\n\n[flow]\np = 1.5\nn_samples = 64\nmax_steps = 100\n"
            ),
        )
        .unwrap();
        paths.push(path);
    }
    let out = tmp.path().join("batch");
    let code = cli::run_batch("evolve", &paths, Some(&out), None);
    assert_eq!(code, cli::EXIT_OK);
    assert!(out.join("exp0").join("trace.csv").exists());
    assert!(out.join("exp1").join("trace.csv").exists());
}

#[test]
fn curve_dumps_round_trip_through_analysis() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = load_from_str(
        r#"
        [initial]
        a0 = 1.0
        cos = [0.05, 0.02]
        sin = [0.0, -0.01]

        [flow]
        p = 1.5
        n_samples = 128
        max_steps = 50
        "#,
        tmp.path(),
    );
    let out = tmp.path().join("run");
    cli::cmd_evolve(&cfg, &out).unwrap();
    let text = fs::read_to_string(out.join("curve_final.csv")).unwrap();
    let parsed = centroflow::io::parse_curve_csv(&text).unwrap();
    // Analysis and resynthesis reproduce the stored samples.
    let spec = centroflow::curve::FourierSpec::analyze(parsed.values(), 0.0);
    let back = centroflow::curve::synthesize(&spec, parsed.n_samples()).unwrap();
    let diff = centroflow::io::max_abs_diff(parsed.values(), back.values());
    assert!(diff < 1e-12, "analysis round trip diff {diff:.3e}");
}

#[test]
fn json_config_parses_too() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("exp.json");
    fs::write(
        &path,
        r#"{"initial": {"a0": 1.0}, "flow": {"p": 1.5, "n_samples": 64}}"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.flow.n_samples, Some(64));
}
