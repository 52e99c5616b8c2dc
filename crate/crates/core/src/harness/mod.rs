//! Randomized verification of the inequalities: scale and witness
//! generators, soundness sweeps, non-vacuity search, refinement studies and
//! the exact-identity self test.
//!
//! Every random draw flows from a single `u64` seed. Trial `i` of a sweep
//! seeds its own generator with `splitmix64(seed + i)`, so trials can run in
//! any order on any number of threads and still produce identical reports.

mod generate;
mod refine;
mod selftest;
mod sweep;

use thiserror::Error;

use crate::calculus::CalculusError;
use crate::inequalities::InequalityError;
use crate::timescale::ScaleError;

pub use generate::{gen_scale, gen_witness, ScaleSpec, WitnessSpec, WitnessStrategy};
pub use refine::{refine_study, ConvergenceReport, RefineLevel, RefineStudy, RefineTarget};
pub use selftest::{identity_suite, power_rule_suite, IdentityCheck, IdentityReport};
pub use sweep::{
    counterexample_search, sweep, CaseTemplate, ExponentChoice, IntervalChoice, SweepConfig,
    SweepReport, TrialRow,
};

/// Default number of witness attempts before a trial is declared starved.
pub const DEFAULT_BUDGET: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("bad spec: {0}")]
    BadSpec(String),
    #[error("no admissible witness after {attempts} attempts")]
    Starved { attempts: usize },
    #[error(
        "generator starvation: {} admissible of {} trials, {} required",
        .0.admissible, .0.trials, .0.min_admissible
    )]
    GeneratorStarvation(Box<SweepReport>),
    #[error("bad refinement sequence: {0}")]
    BadSequence(String),
    #[error("trial count must be at least 1")]
    ZeroTrials,
    #[error(transparent)]
    Inequality(#[from] InequalityError),
}

impl From<ScaleError> for HarnessError {
    fn from(err: ScaleError) -> Self {
        HarnessError::Inequality(err.into())
    }
}

impl From<CalculusError> for HarnessError {
    fn from(err: CalculusError) -> Self {
        HarnessError::Inequality(err.into())
    }
}

/// SplitMix64 finalizer, used to derive per-trial seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    splitmix64(seed.wrapping_add(trial as u64))
}

pub(crate) fn log_uniform<R: rand::Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}
