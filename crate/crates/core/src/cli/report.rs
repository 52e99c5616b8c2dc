use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use super::config::Format;
use crate::harness::{ConvergenceReport, IdentityReport, SweepReport, TrialRow};
use crate::inequalities::VerificationReport;

/// Anything `run` can emit.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Report {
    Verification(Box<VerificationReport>),
    Sweep(Box<SweepReport>),
    Convergence(ConvergenceReport),
    Identity(IdentityReport),
}

/// CSV row of a refinement study.
#[derive(Serialize)]
struct RefineRow {
    h: f64,
    n_points: usize,
    lhs: f64,
    rhs: f64,
    margin: f64,
    bracket: f64,
    worst_slack: Option<f64>,
    difference: Option<f64>,
}

fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> io::Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(io::Error::other)?;
    }
    writer
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))
}

fn opt(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| v.to_string())
}

fn human(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Verification(r) => {
            let c = &r.case;
            let _ = writeln!(
                out,
                "{} {}={} on [{}, {}]: {} (margin {}, lhs {}, rhs {})",
                c.id,
                c.id.exponent_symbol(),
                c.exponent,
                c.a,
                c.b,
                r.verdict,
                r.margin,
                r.lhs,
                r.rhs
            );
        }
        Report::Sweep(r) => {
            let _ = writeln!(
                out,
                "{}: {} trials, {} admissible, holds {}, violated {}, hypothesis-failed {} \
                 (conclusion failed {}), starved {}; worst margin {}",
                r.theorem,
                r.trials,
                r.admissible,
                r.holds,
                r.violated,
                r.hypothesis_failed,
                r.conclusion_failures,
                r.starved,
                opt(r.worst_margin)
            );
        }
        Report::Convergence(r) => {
            let last = r.levels.last();
            let _ = writeln!(
                out,
                "{}: {}, final margin {} at h = {} (continuum {}, gap {})",
                match r.target {
                    crate::harness::RefineTarget::Theorem(id) => id.to_string(),
                    crate::harness::RefineTarget::Classical(id) => id.to_string(),
                },
                if r.converged {
                    "converged"
                } else {
                    "not converged"
                },
                opt(last.map(|l| l.margin)),
                opt(last.map(|l| l.h)),
                opt(r.continuum_margin),
                opt(r.final_gap)
            );
        }
        Report::Identity(r) => {
            for c in &r.checks {
                let _ = writeln!(
                    out,
                    "{:<28} {:>9} cases  max error {:e}  {}",
                    c.name,
                    c.cases,
                    c.max_error,
                    if c.passed { "ok" } else { "FAILED" }
                );
            }
            let _ = writeln!(
                out,
                "selftest: {}",
                if r.passed() { "passed" } else { "failed" }
            );
        }
    }
    out
}

/// Renders a report. CSV columns are fixed per report kind; floats use the
/// shortest representation that round-trips.
pub fn render(report: &Report, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).map_err(io::Error::other)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Human => Ok(human(report).into_bytes()),
        Format::Csv => match report {
            Report::Verification(r) => csv_rows([TrialRow::from_report(0, r)]),
            Report::Sweep(r) => csv_rows(&r.rows),
            Report::Convergence(r) => {
                csv_rows(r.levels.iter().enumerate().map(|(k, l)| RefineRow {
                    h: l.h,
                    n_points: l.n_points,
                    lhs: l.lhs,
                    rhs: l.rhs,
                    margin: l.margin,
                    bracket: l.bracket,
                    worst_slack: l.worst_slack,
                    difference: k.checked_sub(1).map(|j| r.differences[j]),
                }))
            }
            Report::Identity(r) => csv_rows(&r.checks),
        },
    }
}

/// Writes the rendered report to `path`, or to standard output.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> io::Result<()> {
    let bytes = render(report, format)?;
    match path {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(&bytes)?;
            stdout.flush()
        }
    }
}
