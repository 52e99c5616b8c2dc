//! Continuum (T = R) forms of the inequalities, evaluated on h-lattices.
//!
//! The continuum statements are limits; these routines only report lattice
//! values so that a refinement study can watch them converge.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{power, GridFunction};
use crate::inequalities::InequalityError;
use crate::timescale::{ScaleError, TimeScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassicalId {
    /// `∫ f^{p+2} >= (b-a)^{1-p} (∫ f)^{p+1}` under `f(a) >= 0, f' >= p`.
    #[serde(rename = "AKKOUCHI_1_2")]
    Akkouchi12,
    /// `∫ f^t - (∫ f)^{t-1} >= f^{t-1}(a) ∫ f` under `f' >= (t-2)(x-a)^{t-3}`.
    #[serde(rename = "KRASNIQI_1_4")]
    Krasniqi14,
    /// `∫ f^{p+2} - (b-a)^{1-p} (∫ f)^{p+1} >= f^{p+1}(a) ∫ f`
    /// under `f' >= p ((x-a)/(b-a))^{p-1}`.
    #[serde(rename = "KRASNIQI_1_5")]
    Krasniqi15,
}

impl ClassicalId {
    pub const ALL: [ClassicalId; 3] = [
        ClassicalId::Akkouchi12,
        ClassicalId::Krasniqi14,
        ClassicalId::Krasniqi15,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ClassicalId::Akkouchi12 => "AKKOUCHI_1_2",
            ClassicalId::Krasniqi14 => "KRASNIQI_1_4",
            ClassicalId::Krasniqi15 => "KRASNIQI_1_5",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            ClassicalId::Akkouchi12 => "akkouchi-1.2",
            ClassicalId::Krasniqi14 => "krasniqi-1.4",
            ClassicalId::Krasniqi15 => "krasniqi-1.5",
        }
    }

    /// Returns the exponent floor and whether it is strict.
    fn exponent_domain(self) -> (f64, bool) {
        match self {
            ClassicalId::Akkouchi12 => (1.0, true),
            ClassicalId::Krasniqi14 => (3.0, false),
            ClassicalId::Krasniqi15 => (1.0, false),
        }
    }

    pub fn accepts_exponent(self, e: f64) -> bool {
        let (floor, strict) = self.exponent_domain();
        e.is_finite() && if strict { e > floor } else { e >= floor }
    }

    /// Lower bound the derivative must dominate at `x`.
    pub fn derivative_floor(self, exponent: f64, a: f64, b: f64, x: f64) -> f64 {
        let lift = |base: f64, e: f64| power(base, e).unwrap_or(f64::NAN);
        match self {
            ClassicalId::Akkouchi12 => exponent,
            ClassicalId::Krasniqi14 => (exponent - 2.0) * lift(x - a, exponent - 3.0),
            ClassicalId::Krasniqi15 => exponent * lift((x - a) / (b - a), exponent - 1.0),
        }
    }
}

impl fmt::Display for ClassicalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ClassicalId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim();
        ClassicalId::ALL
            .into_iter()
            .find(|id| {
                wanted.eq_ignore_ascii_case(id.code()) || wanted.eq_ignore_ascii_case(id.slug())
            })
            .ok_or_else(|| format!("unknown classical theorem `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalEvaluation {
    pub lhs: f64,
    pub rhs: f64,
    /// Factor multiplying `∫ f` on the right-hand side.
    pub bracket: f64,
    /// Smallest `f'(x) - floor(x)` over the lattice points, `f(a) >= 0` folded in
    /// as a slack of `f(a)` when negative.
    pub worst_slack: f64,
    pub n_points: usize,
}

impl ClassicalEvaluation {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Evaluates a continuum display on the h-lattice of `[a, b]`, with every
/// integral replaced by its left Riemann (delta) sum.
///
/// `h` must divide `b - a`; otherwise the lattice would stop short of `b`.
pub fn classical_case(
    id: ClassicalId,
    exponent: f64,
    a: f64,
    b: f64,
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    h: f64,
) -> Result<ClassicalEvaluation, InequalityError> {
    if !(a < b) {
        return Err(ScaleError::BadInterval(a, b).into());
    }
    if !id.accepts_exponent(exponent) {
        return Err(InequalityError::ClassicalExponent { id, exponent });
    }
    let ts = Arc::new(TimeScale::h_lattice(a, b, h)?);
    if ts.max() != b {
        return Err(ScaleError::BadStep(h).into());
    }
    let grid = GridFunction::tabulate(Arc::clone(&ts), f)?;
    let last = ts.last_index();
    let e = exponent;
    let lift = |base: f64, k: f64| power(base, k).unwrap_or(f64::NAN);
    let integral = |k: f64| grid.delta_sum_with(0, last, |v| lift(v, k));
    let int_f = grid.delta_sum(0, last);
    let fa = grid.at(0);
    let width = b - a;

    let (lhs, bracket) = match id {
        ClassicalId::Akkouchi12 => (
            integral(e + 2.0) - lift(int_f, e + 1.0) / lift(width, e - 1.0),
            0.0,
        ),
        ClassicalId::Krasniqi14 => (integral(e) - lift(int_f, e - 1.0), lift(fa, e - 1.0)),
        ClassicalId::Krasniqi15 => (
            integral(e + 2.0) - lift(int_f, e + 1.0) / lift(width, e - 1.0),
            lift(fa, e + 1.0),
        ),
    };

    let derivative_slack = ts
        .points()
        .iter()
        .map(|&x| df(x) - id.derivative_floor(e, a, b, x))
        .fold(f64::INFINITY, f64::min);
    let worst_slack = if id == ClassicalId::Akkouchi12 && fa < 0.0 {
        derivative_slack.min(fa)
    } else {
        derivative_slack
    };

    Ok(ClassicalEvaluation {
        lhs,
        rhs: bracket * int_f,
        bracket,
        worst_slack,
        n_points: ts.len(),
    })
}
