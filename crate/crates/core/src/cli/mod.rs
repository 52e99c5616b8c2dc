//! Command-line front end: argument and config parsing, dispatch, and report
//! rendering.
//!
//! Exit codes: 0 success, 1 a violated verdict (or a failed self test),
//! 2 usage error, 3 generator starvation, 4 I/O error.

mod config;
mod report;
mod run;

pub use config::{
    parse_args, parse_args_with_env, CliError, Command, Format, FunctionSpec, RunConfig, ScaleArg,
    TargetId, SEED_ENV,
};
pub use report::{emit_report, render, Report};
pub use run::{run, EXIT_IO, EXIT_OK, EXIT_STARVED, EXIT_USAGE, EXIT_VIOLATED};

/// Parses the process arguments and runs; returns the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match parse_args(args) {
        Ok(config) => run(&config),
        Err(CliError::Info(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Err(CliError::Usage(text)) => {
            eprintln!("{}", text.trim_end());
            EXIT_USAGE
        }
    }
}
