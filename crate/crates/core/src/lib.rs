//! Exact calculus on finite time scales and a verification harness for
//! Qi-type integral inequalities.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod classical;
pub mod cli;
pub mod harness;
pub mod inequalities;
pub mod timescale;

pub use calculus::{CalculusError, DerivativeField, GridFunction, PowerBounds};
pub use classical::{classical_case, ClassicalEvaluation, ClassicalId};
pub use inequalities::{
    check_hypothesis, eval_conclusion, verify, HypothesisReport, InequalityError, TheoremCase,
    TheoremId, Verdict, VerificationReport,
};
pub use timescale::{PointClass, ScaleError, ScaleTag, TimeScale};
