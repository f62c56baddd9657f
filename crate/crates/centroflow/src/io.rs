//! File formats: curve and trace CSV dumps, solve/diagnose JSON reports.
//!
//! CSV floats carry 17 significant digits so every f64 round-trips exactly;
//! all output is UTF-8 with LF line endings. JSON is emitted through
//! serde_json with sorted keys, so identical inputs yield identical bytes.

use crate::affine::{self, CriticalPoints};
use crate::curve::{geometry, SupportField};
use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::obstruction::ObstructionReport;
use crate::solver::{SolveReport, SolveStatus};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

/// 17-significant-digit float formatting shared by every CSV column.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Curve dump: `theta,s,r,sigma`, one row per grid node.
pub fn curve_csv(s: &SupportField) -> Result<String> {
    let geom = geometry(s)?;
    let sigma = affine::sigma_field(s)?;
    let mut out = String::from("theta,s,r,sigma\n");
    for (i, &t) in s.thetas().iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_float(t),
            fmt_float(s.values()[i]),
            fmt_float(geom.radius_of_curvature[i]),
            fmt_float(sigma[i]),
        )
        .expect("string write");
    }
    Ok(out)
}

/// Parse a curve dump back into a support field (only the `s` column is
/// authoritative; the rest is re-derivable).
pub fn parse_curve_csv(text: &str) -> Result<SupportField> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let _theta = cols.next();
        let s: f64 = cols
            .next()
            .and_then(|c| c.trim().parse().ok())
            .ok_or(Error::Grid {
                n: lineno,
                reason: "curve CSV row is missing a parsable s column",
            })?;
        values.push(s);
    }
    SupportField::new(values)
}

/// Λ-curve dump: `theta,x,y,kappa_lambda,mu_lambda`.
pub fn lambda_csv(s: &SupportField) -> Result<String> {
    let lam = affine::lambda_curve(s)?;
    let mut out = String::from("theta,x,y,kappa_lambda,mu_lambda\n");
    for (i, &t) in s.thetas().iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(t),
            fmt_float(lam.points[i][0]),
            fmt_float(lam.points[i][1]),
            fmt_float(lam.euclid_curvature[i]),
            fmt_float(lam.affine_curvature[i]),
        )
        .expect("string write");
    }
    Ok(out)
}

/// Trace dump: one row per accepted step.
pub fn trace_csv(trace: &FlowTrace) -> String {
    let mut out =
        String::from("step,t,tau,area,length,omega_p_psi,ratio,min_speed,residual_osc,aspect,dt\n");
    for row in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.step,
            fmt_float(row.t),
            fmt_float(row.tau),
            fmt_float(row.area),
            fmt_float(row.length),
            fmt_float(row.omega_p_psi),
            fmt_float(row.ratio),
            fmt_float(row.min_speed),
            fmt_float(row.residual_osc),
            fmt_float(row.aspect),
            fmt_float(row.dt),
        )
        .expect("string write");
    }
    out
}

fn critical_value(critical: &CriticalPoints) -> (Value, Value) {
    match critical {
        CriticalPoints::Degenerate => (json!("degenerate"), json!([])),
        CriticalPoints::Counted(c) => (json!(c.count), json!(c.locations)),
    }
}

/// Diagnose report JSON.
pub fn diagnose_json(report: &ObstructionReport) -> Value {
    let (n_critical, locations) = critical_value(&report.critical);
    json!({
        "n_critical": n_critical,
        "critical_locations": locations,
        "kw": report.kw_integrals,
        "b_min_at_critical": report.b_min_at_critical,
        "b_nondegenerate": report.b_nondegenerate,
        "winding": report.winding,
        "necessary_condition_pass": report.necessary_condition_pass,
        "theorem_b_applicable": report.theorem_b_applicable,
    })
}

pub fn status_str(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "Converged",
        SolveStatus::ApproximatingFamily => "ApproximatingFamily",
        SolveStatus::Halted => "Halted",
    }
}

/// Solve report JSON; `curve_refs` pairs with `report.snapshots` and names the
/// CSV files the snapshot curves were written to.
pub fn solve_report_json(report: &SolveReport, curve_refs: &[String]) -> Value {
    let snapshots: Vec<Value> = report
        .snapshots
        .iter()
        .zip(curve_refs)
        .map(|(snap, reference)| {
            json!({
                "t": snap.t,
                "residual_sup": snap.residual_sup,
                "curve_ref": reference,
            })
        })
        .collect();
    json!({
        "status": status_str(report.status),
        "residual_sup": report.residual_sup,
        "residual_osc": report.residual_osc,
        "lambda_star": report.lambda_star,
        "k": report.k.to_string(),
        "p": report.p,
        "n_steps": report.trace.rows.last().map(|r| r.step).unwrap_or(0),
        "snapshots": snapshots,
    })
}

/// Write a solve report and its snapshot curves into `dir`; returns the JSON.
pub fn write_solve_report(report: &SolveReport, dir: &Path) -> std::io::Result<Value> {
    let mut refs = Vec::new();
    for (i, snap) in report.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:02}.csv");
        let csv = curve_csv(&snap.curve)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
        std::fs::write(dir.join(&name), csv)?;
        refs.push(name);
    }
    let best = curve_csv(&report.best_s)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
    std::fs::write(dir.join("best_s.csv"), best)?;
    let value = solve_report_json(report, &refs);
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&value).expect("report serializes") + "\n",
    )?;
    std::fs::write(dir.join("trace.csv"), trace_csv(&report.trace))?;
    Ok(value)
}

/// Mean-square distance between a stored field and its re-parsed value; used
/// by the round-trip checks.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}
