use std::sync::Arc;

use super::config::{Command, FunctionSpec, RunConfig};
use super::report::{emit_report, Report};
use super::Format;
use crate::calculus::GridFunction;
use crate::harness::{
    counterexample_search, gen_scale, identity_suite, power_rule_suite, refine_study, sweep,
    CaseTemplate, ExponentChoice, HarnessError, RefineStudy, SweepConfig,
};
use crate::inequalities::{verify, TheoremCase, TheoremId, Verdict};
use crate::timescale::TimeScale;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_STARVED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
enum RunError {
    Usage(String),
    Io(String),
}

impl From<HarnessError> for RunError {
    fn from(err: HarnessError) -> Self {
        RunError::Usage(err.to_string())
    }
}

impl From<crate::inequalities::InequalityError> for RunError {
    fn from(err: crate::inequalities::InequalityError) -> Self {
        RunError::Usage(err.to_string())
    }
}

/// Executes a validated config, writes its report and returns the exit code.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config) {
        Ok((report, code)) => {
            if let Err(err) = emit_report(&report, config.format, config.output.as_deref()) {
                eprintln!("error: cannot write report: {err}");
                return EXIT_IO;
            }
            code
        }
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(RunError::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}

fn theorem(config: &RunConfig) -> Result<TheoremId, RunError> {
    config
        .theorem
        .and_then(|t| t.theorem())
        .ok_or_else(|| RunError::Usage("a qi-3.x theorem is required".into()))
}

fn template(config: &RunConfig, id: TheoremId) -> CaseTemplate {
    match config.exponent {
        Some(e) => CaseTemplate {
            exponent: ExponentChoice::Fixed(e),
            ..CaseTemplate::randomized(id)
        },
        None => CaseTemplate::randomized(id),
    }
}

fn report_time(config: &RunConfig, wall: std::time::Duration) {
    if config.format == Format::Human {
        eprintln!("wall time {:.3} s", wall.as_secs_f64());
    }
}

fn execute(config: &RunConfig) -> Result<(Report, i32), RunError> {
    match config.command {
        Command::Verify => run_verify(config),
        Command::Sweep => {
            let id = theorem(config)?;
            let mut sweep_config =
                SweepConfig::new(template(config, id), config.trials, config.seed);
            if let Some(ref scale) = config.scale {
                sweep_config.scale = scale.0.clone();
            }
            let (report, code) = match sweep(&sweep_config) {
                Ok(report) => {
                    let code = if report.violated > 0 {
                        EXIT_VIOLATED
                    } else {
                        EXIT_OK
                    };
                    (report, code)
                }
                Err(HarnessError::GeneratorStarvation(report)) => {
                    eprintln!(
                        "generator starvation: {} admissible of {} trials, {} required",
                        report.admissible, report.trials, report.min_admissible
                    );
                    let code = if report.violated > 0 {
                        EXIT_VIOLATED
                    } else {
                        EXIT_STARVED
                    };
                    (*report, code)
                }
                Err(other) => return Err(other.into()),
            };
            report_time(config, report.wall_time);
            Ok((Report::Sweep(Box::new(report)), code))
        }
        Command::Search => {
            let id = theorem(config)?;
            let report = counterexample_search(&template(config, id), config.trials, config.seed)?;
            report_time(config, report.wall_time);
            Ok((Report::Sweep(Box::new(report)), EXIT_OK))
        }
        Command::Refine => {
            let target = config
                .theorem
                .ok_or_else(|| RunError::Usage("refine requires --theorem".into()))?;
            let (Some(e), Some(a), Some(b)) = (config.exponent, config.a, config.b) else {
                return Err(RunError::Usage(
                    "refine requires an exponent, --a and --b".into(),
                ));
            };
            let (f, df) = config
                .function
                .as_ref()
                .and_then(|f| f.closed_form(a))
                .ok_or_else(|| RunError::Usage("refine needs a closed-form function".into()))?;
            let mut study =
                RefineStudy::dyadic(target.into(), e, a, b, config.levels.0, config.levels.1);
            study.continuum_margin = config.continuum_margin;
            let report = refine_study(&study, &*f, Some(&*df))?;
            Ok((Report::Convergence(report), EXIT_OK))
        }
        Command::Selftest => {
            let mut report = identity_suite(config.trials, config.seed)?;
            report
                .checks
                .extend(power_rule_suite(config.trials * 10, config.seed)?);
            let code = if report.passed() {
                EXIT_OK
            } else {
                EXIT_VIOLATED
            };
            Ok((Report::Identity(report), code))
        }
    }
}

fn run_verify(config: &RunConfig) -> Result<(Report, i32), RunError> {
    let id = theorem(config)?;
    let e = config
        .exponent
        .ok_or_else(|| RunError::Usage("verify requires an exponent".into()))?;
    let scale = match config.scale {
        Some(ref arg) => Some(Arc::new(gen_scale(&arg.0, config.seed)?)),
        None => None,
    };
    let spec = config
        .function
        .as_ref()
        .ok_or_else(|| RunError::Usage("verify requires --f".into()))?;
    let f = load_function(spec, scale, config.a)?;
    let ts = f.scale();
    let case = TheoremCase::new(
        id,
        e,
        config.a.unwrap_or(ts.min()),
        config.b.unwrap_or(ts.max()),
    )?;
    let report = verify(&case, &f)?;
    let code = if report.verdict == Verdict::Violated {
        EXIT_VIOLATED
    } else {
        EXIT_OK
    };
    Ok((Report::Verification(Box::new(report)), code))
}

fn load_function(
    spec: &FunctionSpec,
    scale: Option<Arc<TimeScale>>,
    a: Option<f64>,
) -> Result<GridFunction, RunError> {
    let need_scale = || {
        scale
            .clone()
            .ok_or_else(|| RunError::Usage("--scale is required for this function".into()))
    };
    let calc = |e: crate::CalculusError| RunError::Usage(e.to_string());
    match spec {
        FunctionSpec::Values(values) => {
            GridFunction::new(need_scale()?, values.clone()).map_err(calc)
        }
        FunctionSpec::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Io(format!("cannot read {}: {e}", path.display())))?;
            if let Ok(grid) = serde_json::from_str::<GridFunction>(&text) {
                if let Some(ts) = scale {
                    if ts.points() != grid.scale().points() {
                        return Err(RunError::Usage(format!(
                            "{} carries a scale that differs from --scale",
                            path.display()
                        )));
                    }
                }
                return Ok(grid);
            }
            let values: Vec<f64> = serde_json::from_str(&text).map_err(|e| {
                RunError::Usage(format!(
                    "{}: expected a JSON array of values or a {{scale, values}} object ({e})",
                    path.display()
                ))
            })?;
            GridFunction::new(need_scale()?, values).map_err(calc)
        }
        closed => {
            let ts = need_scale()?;
            let anchor = a.unwrap_or(ts.min());
            let (f, _) = closed
                .closed_form(anchor)
                .expect("named families have closed forms");
            GridFunction::tabulate(ts, &*f).map_err(calc)
        }
    }
}
