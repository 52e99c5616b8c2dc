//! Qi-type integral inequalities on time scales, each encoded as a pointwise
//! hypothesis plus a conclusion `lhs >= rhs`.
//!
//! Conventions shared by every theorem:
//!
//! * Delta hypotheses are checked at every `x ∈ [a, b)`; nabla hypotheses at
//!   every `x ∈ (a, b]`.
//! * Compositions `f^σ`, `f^ρ`, `f^{σ²}` use the ambient scale and saturate
//!   at its extremes. A delta check whose `σ²(x)` saturates is flagged.
//! * Nonnegativity and monotonicity are checked on `[a, b]`, widened to
//!   `[ρ(a), b]` for the theorems whose integrals involve `f^ρ`.
//! * `0^0 = 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{power, sigma_delta_at, CalculusError, GridFunction};
use crate::timescale::{ScaleError, TimeScale};

/// Relative tolerance for every inequality assertion.
pub const INEQUALITY_TOLERANCE: f64 = 1e-10;

/// `max(1, |x|, |y|)`.
pub fn problem_scale(x: f64, y: f64) -> f64 {
    1f64.max(x.abs()).max(y.abs())
}

/// `x >= y` up to [`INEQUALITY_TOLERANCE`] relative to the problem scale.
/// NaN never passes.
pub fn holds_within_tolerance(x: f64, y: f64) -> bool {
    x - y >= -INEQUALITY_TOLERANCE * problem_scale(x, y)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("{id}: exponent {exponent} outside its domain (needs {symbol} >= {floor})")]
    ExponentOutOfRange {
        id: TheoremId,
        exponent: f64,
        symbol: char,
        floor: f64,
    },
    #[error("{id}: exponent {exponent} outside its domain")]
    ClassicalExponent {
        id: crate::classical::ClassicalId,
        exponent: f64,
    },
    #[error("{0}: a = b leaves the divisor (b - a)^(p - 1) at zero")]
    DegenerateDivisor(TheoremId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "QI_3_1")]
    Qi31,
    #[serde(rename = "QI_3_2")]
    Qi32,
    #[serde(rename = "QI_3_3")]
    Qi33,
    #[serde(rename = "QI_3_4")]
    Qi34,
    #[serde(rename = "QI_3_5")]
    Qi35,
    #[serde(rename = "QI_3_6_NABLA")]
    Qi36Nabla,
    #[serde(rename = "QI_3_7_NABLA")]
    Qi37Nabla,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::Qi31,
        TheoremId::Qi32,
        TheoremId::Qi33,
        TheoremId::Qi34,
        TheoremId::Qi35,
        TheoremId::Qi36Nabla,
        TheoremId::Qi37Nabla,
    ];

    pub fn code(self) -> &'static str {
        match self {
            TheoremId::Qi31 => "QI_3_1",
            TheoremId::Qi32 => "QI_3_2",
            TheoremId::Qi33 => "QI_3_3",
            TheoremId::Qi34 => "QI_3_4",
            TheoremId::Qi35 => "QI_3_5",
            TheoremId::Qi36Nabla => "QI_3_6_NABLA",
            TheoremId::Qi37Nabla => "QI_3_7_NABLA",
        }
    }

    /// CLI spelling, e.g. `qi-3.1`.
    pub fn slug(self) -> &'static str {
        match self {
            TheoremId::Qi31 => "qi-3.1",
            TheoremId::Qi32 => "qi-3.2",
            TheoremId::Qi33 => "qi-3.3",
            TheoremId::Qi34 => "qi-3.4",
            TheoremId::Qi35 => "qi-3.5",
            TheoremId::Qi36Nabla => "qi-3.6",
            TheoremId::Qi37Nabla => "qi-3.7",
        }
    }

    /// Smallest admissible exponent.
    pub fn exponent_floor(self) -> f64 {
        match self {
            TheoremId::Qi31 | TheoremId::Qi33 | TheoremId::Qi35 | TheoremId::Qi36Nabla => 3.0,
            TheoremId::Qi32 | TheoremId::Qi34 | TheoremId::Qi37Nabla => 1.0,
        }
    }

    /// Whether the exponent is written `t` or `p`.
    pub fn exponent_symbol(self) -> char {
        match self {
            TheoremId::Qi31 | TheoremId::Qi36Nabla => 't',
            _ => 'p',
        }
    }

    pub fn is_nabla(self) -> bool {
        matches!(self, TheoremId::Qi36Nabla | TheoremId::Qi37Nabla)
    }

    /// Theorems whose integrals involve `f^ρ`.
    pub fn uses_rho(self) -> bool {
        matches!(self, TheoremId::Qi33 | TheoremId::Qi34 | TheoremId::Qi35)
    }

    /// Theorems carrying the `(b - a)^(p-1)` divisor.
    pub fn has_divisor(self) -> bool {
        matches!(
            self,
            TheoremId::Qi32 | TheoremId::Qi34 | TheoremId::Qi37Nabla
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for TheoremId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim();
        TheoremId::ALL
            .into_iter()
            .find(|id| {
                wanted.eq_ignore_ascii_case(id.code()) || wanted.eq_ignore_ascii_case(id.slug())
            })
            .ok_or_else(|| format!("unknown theorem `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremCase {
    pub id: TheoremId,
    pub exponent: f64,
    pub a: f64,
    pub b: f64,
}

impl TheoremCase {
    pub fn new(id: TheoremId, exponent: f64, a: f64, b: f64) -> Result<Self, InequalityError> {
        let case = Self { id, exponent, a, b };
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<(), InequalityError> {
        let floor = self.id.exponent_floor();
        if !(self.exponent.is_finite() && self.exponent >= floor) {
            return Err(InequalityError::ExponentOutOfRange {
                id: self.id,
                exponent: self.exponent,
                symbol: self.id.exponent_symbol(),
                floor,
            });
        }
        if !(self.a <= self.b) {
            return Err(ScaleError::BadInterval(self.a, self.b).into());
        }
        Ok(())
    }

    /// `1 / (b - a)^(p - 1)`. Only meaningful for divisor theorems.
    fn divisor_factor(&self) -> Result<f64, InequalityError> {
        let p = self.exponent;
        let width = self.b - self.a;
        if width == 0.0 && p > 1.0 {
            return Err(InequalityError::DegenerateDivisor(self.id));
        }
        Ok(1.0 / pw(width, p - 1.0))
    }
}

/// Power that maps rejected bases to NaN, so a violated nonnegativity
/// hypothesis shows up as a failing slack instead of an error.
fn pw(base: f64, exp: f64) -> f64 {
    power(base, exp).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointSlack {
    pub point: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub slack: f64,
}

impl PointSlack {
    pub fn passes(&self) -> bool {
        holds_within_tolerance(self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub slacks: Vec<PointSlack>,
    pub holds: bool,
    pub monotone_ok: bool,
    pub nonneg_ok: bool,
    /// Points at which the pointwise condition was evaluated.
    pub domain: Vec<f64>,
    /// Some checked `σ²(x)` hit the ambient maximum.
    pub saturated: bool,
}

impl HypothesisReport {
    /// Smallest pointwise slack, `None` on an empty domain.
    pub fn worst_slack(&self) -> Option<f64> {
        self.slacks
            .iter()
            .map(|s| s.slack)
            .reduce(|x, y| if y < x || y.is_nan() { y } else { x })
    }
}

/// Evaluated conclusion `lhs >= rhs`, where `rhs = bracket * integral`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conclusion {
    pub lhs: f64,
    pub rhs: f64,
    pub bracket: f64,
    pub integral: f64,
}

impl Conclusion {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    HypothesisFailed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::HypothesisFailed => "hypothesis-failed",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub case: TheoremCase,
    pub hypothesis: HypothesisReport,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
    /// Points of `[a, b]_T`.
    pub n_points: usize,
    /// Attached whenever the verdict is `violated`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<GridFunction>,
}

impl VerificationReport {
    pub fn saturated(&self) -> bool {
        self.hypothesis.saturated
    }

    pub fn worst_slack(&self) -> Option<f64> {
        self.hypothesis.worst_slack()
    }
}

/// Everything the pointwise conditions read at index `i`.
struct Local {
    x: f64,
    f: f64,
    f_sigma: f64,
    f_sigma2: f64,
    f_rho: f64,
    sigma2: f64,
    mu: f64,
    sigma_delta: f64,
    delta: f64,
    nabla: f64,
}

impl Local {
    fn at(f: &GridFunction, i: usize) -> Self {
        let ts = f.scale();
        let s = ts.sigma_index(i);
        let ss = ts.sigma_index(s);
        let r = ts.rho_index(i);
        let delta = if i < ts.last_index() {
            f.delta_at(i)
        } else {
            0.0
        };
        let nabla = if i > 0 { f.nabla_at(i) } else { 0.0 };
        let sigma_delta = if i < ts.last_index() {
            sigma_delta_at(ts, i)
        } else {
            0.0
        };
        Self {
            x: ts.point(i),
            f: f.at(i),
            f_sigma: f.at(s),
            f_sigma2: f.at(ss),
            f_rho: f.at(r),
            sigma2: ts.point(ss),
            mu: ts.mu_at(i),
            sigma_delta,
            delta,
            nabla,
        }
    }
}

/// Left and right side of the pointwise hypothesis at index `i`.
pub(crate) fn pointwise_terms(case: &TheoremCase, f: &GridFunction, i: usize) -> (f64, f64) {
    let e = case.exponent;
    let a = case.a;
    let width = case.b - case.a;
    let l = Local::at(f, i);
    match case.id {
        TheoremId::Qi31 => (
            pw(l.f, e - 2.0) * l.delta,
            (e - 2.0) * pw(l.f_sigma2, e - 2.0) * pw(l.sigma2 - a, e - 3.0) * l.sigma_delta,
        ),
        TheoremId::Qi32 => (
            pw(l.f, e) * l.delta,
            e / pw(width, e - 1.0) * pw(l.f_sigma2, e) * pw(l.sigma2 - a, e - 1.0) * l.sigma_delta,
        ),
        TheoremId::Qi33 => (
            pw(l.f, e - 3.0) * l.delta,
            (e - 2.0) * pw(l.f_sigma2, e - 3.0) * pw(l.sigma2 - a, e - 3.0) * l.sigma_delta,
        ),
        TheoremId::Qi34 => ((l.f_sigma2 - l.f_sigma) / l.mu, e * l.sigma_delta),
        TheoremId::Qi35 => (
            (l.f_sigma2 - l.f_sigma) / l.mu,
            (e - 2.0) * pw(l.sigma2 - a, e - 3.0) * l.sigma_delta,
        ),
        TheoremId::Qi36Nabla => (
            pw(l.f_rho, e - 2.0) * l.nabla,
            (e - 2.0) * pw(l.f, e - 2.0) * pw(l.x - a, e - 3.0),
        ),
        TheoremId::Qi37Nabla => (
            pw(l.f_rho, e) * l.nabla,
            e / pw(width, e - 1.0) * pw(l.f, e) * pw(l.x - a, e - 1.0),
        ),
    }
}

/// Index range of the pointwise check for a case whose interval has indices
/// `ia..=ib`.
pub(crate) fn check_domain(id: TheoremId, ia: usize, ib: usize) -> std::ops::Range<usize> {
    if id.is_nabla() {
        ia + 1..ib + 1
    } else {
        ia..ib
    }
}

/// Index range over which nonnegativity and monotonicity are required.
pub(crate) fn shape_range(id: TheoremId, ts: &TimeScale, ia: usize, ib: usize) -> (usize, usize) {
    if id.uses_rho() {
        (ts.rho_index(ia), ib)
    } else {
        (ia, ib)
    }
}

pub fn check_hypothesis(
    case: &TheoremCase,
    f: &GridFunction,
) -> Result<HypothesisReport, InequalityError> {
    case.validate()?;
    let ts = f.scale();
    let (ia, ib) = ts.interval_indices(case.a, case.b)?;
    let (from, to) = shape_range(case.id, ts, ia, ib);
    let nonneg_ok = f.values()[from..=to].iter().all(|&v| v >= 0.0);
    let monotone_ok = f.is_nondecreasing_on(from, to);

    let domain = check_domain(case.id, ia, ib);
    let saturated = !case.id.is_nabla()
        && domain.clone().any(|i| {
            let s = ts.sigma_index(i);
            ts.sigma_index(s) == s
        });
    let slacks: Vec<PointSlack> = domain
        .clone()
        .map(|i| {
            let (lhs, rhs) = pointwise_terms(case, f, i);
            PointSlack {
                point: ts.point(i),
                lhs,
                rhs,
                slack: lhs - rhs,
            }
        })
        .collect();
    let holds = nonneg_ok && monotone_ok && slacks.iter().all(PointSlack::passes);
    Ok(HypothesisReport {
        slacks,
        holds,
        monotone_ok,
        nonneg_ok,
        domain: domain.map(|i| ts.point(i)).collect(),
        saturated,
    })
}

/// Left-to-right sum of `term(i) * weight(i)` over an index range.
fn weighted_sum(
    range: impl Iterator<Item = usize>,
    term: impl Fn(usize) -> f64,
    weight: impl Fn(usize) -> f64,
) -> f64 {
    range.fold(0.0, |acc, i| acc + term(i) * weight(i))
}

pub fn eval_conclusion(
    case: &TheoremCase,
    f: &GridFunction,
) -> Result<Conclusion, InequalityError> {
    case.validate()?;
    let ts = f.scale();
    let (ia, ib) = ts.interval_indices(case.a, case.b)?;
    let e = case.exponent;
    let v = f.values();
    let mu = |i: usize| ts.mu_at(i);
    let nu = |i: usize| ts.nu_at(i);
    let at_sigma = |i: usize| v[ts.sigma_index(i)];
    let at_rho = |i: usize| v[ts.rho_index(i)];
    let fa = v[ia];
    let mu_a = ts.mu_at(ia);

    // ∫_a^b f^ρ Δx, shared by the three f^ρ theorems.
    let rho_integral = || weighted_sum(ia..ib, at_rho, mu);

    let (lhs, bracket, integral) = match case.id {
        TheoremId::Qi31 => {
            let int_f = weighted_sum(ia..ib, |i| v[i], mu);
            let int_ft = weighted_sum(ia..ib, |i| pw(v[i], e), mu);
            (
                int_ft - pw(int_f, e - 1.0),
                pw(fa, e - 2.0) * (fa - (e - 1.0) * pw(mu_a, e - 2.0)),
                int_f,
            )
        }
        TheoremId::Qi32 => {
            let c = case.divisor_factor()?;
            let int_f = weighted_sum(ia..ib, |i| v[i], mu);
            let int_fp2 = weighted_sum(ia..ib, |i| pw(v[i], e + 2.0), mu);
            (
                int_fp2 - c * pw(int_f, e + 1.0),
                pw(fa, e) * (fa - c * (e + 1.0) * pw(mu_a, e)),
                int_f,
            )
        }
        TheoremId::Qi33 => {
            let int_rho = rho_integral();
            let int_fp = weighted_sum(ia..ib, |i| pw(v[i], e), mu);
            (
                int_fp - pw(int_rho, e - 1.0),
                pw(fa, e - 2.0) * (fa - (e - 1.0) * pw(mu_a, e - 2.0)),
                int_rho,
            )
        }
        TheoremId::Qi34 => {
            let c = case.divisor_factor()?;
            let int_rho = rho_integral();
            let int_sigma = weighted_sum(ia..ib, |i| pw(at_sigma(i), e + 2.0), mu);
            (
                int_sigma - c * pw(int_rho, e + 1.0),
                pw(at_sigma(ia), e + 1.0) - c * (e + 1.0) * pw(at_rho(ia) * mu_a, e),
                int_rho,
            )
        }
        TheoremId::Qi35 => {
            let int_rho = rho_integral();
            let int_sigma = weighted_sum(ia..ib, |i| pw(at_sigma(i), e), mu);
            let fs_a = at_sigma(ia);
            (
                int_sigma - pw(int_rho, e - 1.0),
                pw(fs_a, e - 2.0) * (fs_a - (e - 1.0) * pw(mu_a, e - 2.0)),
                int_rho,
            )
        }
        TheoremId::Qi36Nabla => {
            let int_f = weighted_sum(ia + 1..=ib, |i| v[i], nu);
            let int_ft = weighted_sum(ia + 1..=ib, |i| pw(v[i], e), nu);
            (int_ft - pw(int_f, e - 1.0), pw(fa, e - 1.0), int_f)
        }
        TheoremId::Qi37Nabla => {
            let c = case.divisor_factor()?;
            let int_f = weighted_sum(ia + 1..=ib, |i| v[i], nu);
            let int_fp2 = weighted_sum(ia + 1..=ib, |i| pw(v[i], e + 2.0), nu);
            (int_fp2 - c * pw(int_f, e + 1.0), pw(fa, e + 1.0), int_f)
        }
    };
    Ok(Conclusion {
        lhs,
        rhs: bracket * integral,
        bracket,
        integral,
    })
}

pub fn verify(case: &TheoremCase, f: &GridFunction) -> Result<VerificationReport, InequalityError> {
    let hypothesis = check_hypothesis(case, f)?;
    let conclusion = eval_conclusion(case, f)?;
    let (ia, ib) = f.scale().interval_indices(case.a, case.b)?;
    let verdict = if !hypothesis.holds {
        Verdict::HypothesisFailed
    } else if holds_within_tolerance(conclusion.lhs, conclusion.rhs) {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    Ok(VerificationReport {
        case: *case,
        hypothesis,
        lhs: conclusion.lhs,
        rhs: conclusion.rhs,
        margin: conclusion.margin(),
        verdict,
        n_points: ib - ia + 1,
        witness: (verdict == Verdict::Violated).then(|| f.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn lattice(a: f64, b: f64, h: f64) -> Arc<TimeScale> {
        Arc::new(TimeScale::h_lattice(a, b, h).unwrap())
    }

    fn grid(points: &[f64], values: &[f64]) -> GridFunction {
        let ts = Arc::new(TimeScale::from_points(points.to_vec()).unwrap());
        GridFunction::new(ts, values.to_vec()).unwrap()
    }

    #[test]
    fn theorem_names_parse() {
        for id in TheoremId::ALL {
            assert_eq!(id.slug().parse::<TheoremId>(), Ok(id));
            assert_eq!(id.code().parse::<TheoremId>(), Ok(id));
        }
        assert_eq!("QI-3.6".parse::<TheoremId>(), Ok(TheoremId::Qi36Nabla));
        assert!("qi-4.1".parse::<TheoremId>().is_err());
        assert_eq!(
            serde_json::to_string(&TheoremId::Qi36Nabla).unwrap(),
            "\"QI_3_6_NABLA\""
        );
    }

    #[test]
    fn exponent_domains() {
        assert!(TheoremCase::new(TheoremId::Qi31, 3.0, 0.0, 1.0).is_ok());
        assert!(matches!(
            TheoremCase::new(TheoremId::Qi31, 2.0, 0.0, 1.0),
            Err(InequalityError::ExponentOutOfRange { symbol: 't', .. })
        ));
        assert!(TheoremCase::new(TheoremId::Qi32, 1.0, 0.0, 1.0).is_ok());
        assert!(TheoremCase::new(TheoremId::Qi33, 2.9, 0.0, 1.0).is_err());
        assert!(TheoremCase::new(TheoremId::Qi37Nabla, 0.5, 0.0, 1.0).is_err());
        assert!(TheoremCase::new(TheoremId::Qi34, f64::NAN, 0.0, 1.0).is_err());
        assert!(matches!(
            TheoremCase::new(TheoremId::Qi34, 1.0, 1.0, 0.0),
            Err(InequalityError::Scale(ScaleError::BadInterval(..)))
        ));
    }

    #[test]
    fn zero_function_where_both_sides_vanish() {
        let ts = lattice(0.0, 5.0, 1.0);
        let zero = GridFunction::constant(ts, 0.0).unwrap();
        for (id, e) in [
            (TheoremId::Qi31, 3.0),
            (TheoremId::Qi32, 2.0),
            (TheoremId::Qi33, 4.0),
            (TheoremId::Qi36Nabla, 3.0),
            (TheoremId::Qi37Nabla, 1.5),
        ] {
            let case = TheoremCase::new(id, e, 0.0, 5.0).unwrap();
            let report = verify(&case, &zero).unwrap();
            assert!(report.hypothesis.holds, "{id}");
            assert!(report.hypothesis.slacks.iter().all(|s| s.slack == 0.0));
            assert_eq!((report.lhs, report.rhs, report.margin), (0.0, 0.0, 0.0));
            assert_eq!(report.verdict, Verdict::Holds);
        }
    }

    #[test]
    fn zero_function_fails_growth_floor_theorems() {
        // With 0^0 = 1 these hypotheses demand strictly positive growth.
        let zero = GridFunction::constant(lattice(0.0, 5.0, 1.0), 0.0).unwrap();
        for (id, e) in [
            (TheoremId::Qi33, 3.0),
            (TheoremId::Qi34, 1.0),
            (TheoremId::Qi35, 3.0),
        ] {
            let case = TheoremCase::new(id, e, 0.0, 5.0).unwrap();
            let report = verify(&case, &zero).unwrap();
            assert_eq!(report.verdict, Verdict::HypothesisFailed, "{id}");
            assert_eq!(report.margin, 0.0);
        }
    }

    #[test]
    fn linear_profile_is_tight_for_qi_3_4() {
        let p = 2.5;
        let ts = lattice(0.0, 5.0, 1.0);
        let f = GridFunction::tabulate(ts, |x| p * x).unwrap();
        let case = TheoremCase::new(TheoremId::Qi34, p, 0.0, 5.0).unwrap();
        let report = check_hypothesis(&case, &f).unwrap();
        assert!(report.holds);
        // Interior points have σ^Δ = 1 and (f^σ)^Δ = p; the last one saturates
        // to 0 >= 0.
        assert!(report.slacks.iter().all(|s| s.slack == 0.0));
        assert!(report.saturated);
        assert_eq!(report.domain, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn decreasing_function_fails_shape_check() {
        let f = grid(&[0.0, 1.0, 2.0], &[3.0, 2.0, 4.0]);
        let case = TheoremCase::new(TheoremId::Qi31, 3.0, 0.0, 2.0).unwrap();
        let report = check_hypothesis(&case, &f).unwrap();
        assert!(!report.monotone_ok);
        assert!(report.nonneg_ok);
        assert!(!report.holds);
    }

    #[test]
    fn rho_theorems_need_monotonicity_at_rho_a() {
        // f(ρ(a)) is large; on [a,b] alone the function looks admissible but
        // the conclusion fails.
        let f = grid(&[-1.0, 0.0, 1.0], &[10.0, 1.0, 1.0]);
        let case = TheoremCase::new(TheoremId::Qi33, 3.0, 0.0, 1.0).unwrap();
        let report = verify(&case, &f).unwrap();
        assert!(!report.hypothesis.monotone_ok);
        assert_eq!(report.verdict, Verdict::HypothesisFailed);
        assert_eq!(report.lhs, 1.0 - 100.0);
        assert_eq!(report.rhs, -10.0);
    }

    #[test]
    fn two_point_qi_3_1() {
        let (c, d) = (1.5, 4.0);
        let f = grid(&[0.0, 1.0], &[c, d]);
        let case = TheoremCase::new(TheoremId::Qi31, 3.0, 0.0, 1.0).unwrap();
        let concl = eval_conclusion(&case, &f).unwrap();
        assert_eq!(concl.lhs, c * c * c - c * c);
        assert_eq!(concl.rhs, c * (c - 2.0) * c);
        let report = verify(&case, &f).unwrap();
        assert_eq!(report.verdict, Verdict::Holds);
        assert!(report.saturated());
    }

    #[test]
    fn constant_counterexample_qi_3_6() {
        let c = 0.1;
        let f = GridFunction::constant(lattice(0.0, 5.0, 1.0), c).unwrap();
        let case = TheoremCase::new(TheoremId::Qi36Nabla, 3.0, 0.0, 5.0).unwrap();
        let report = verify(&case, &f).unwrap();
        assert_eq!(report.verdict, Verdict::HypothesisFailed);
        let expected_lhs = 5.0 * c * c * c - 25.0 * c * c;
        assert!((report.lhs - expected_lhs).abs() < 1e-12);
        assert!((report.rhs - 5.0 * c * c * c).abs() < 1e-12);
        assert!((report.margin + 25.0 * c * c).abs() < 1e-12);
    }

    #[test]
    fn degenerate_interval() {
        let f = GridFunction::tabulate(lattice(0.0, 3.0, 1.0), |x| x + 1.0).unwrap();
        for id in TheoremId::ALL {
            let e = id.exponent_floor() + 0.5;
            let case = TheoremCase::new(id, e, 1.0, 1.0).unwrap();
            if id.has_divisor() {
                assert_eq!(
                    verify(&case, &f),
                    Err(InequalityError::DegenerateDivisor(id))
                );
            } else {
                let report = verify(&case, &f).unwrap();
                assert_eq!((report.lhs, report.rhs), (0.0, 0.0), "{id}");
                assert_eq!(report.verdict, Verdict::Holds);
                assert!(report.hypothesis.domain.is_empty());
            }
        }
        // p = 1 leaves (b - a)^0 = 1, so no divisor problem.
        let case = TheoremCase::new(TheoremId::Qi34, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(verify(&case, &f).unwrap().margin, 0.0);
    }

    #[test]
    fn not_a_point() {
        let f = GridFunction::constant(lattice(0.0, 3.0, 1.0), 1.0).unwrap();
        let case = TheoremCase::new(TheoremId::Qi31, 3.0, 0.5, 3.0).unwrap();
        assert!(matches!(
            check_hypothesis(&case, &f),
            Err(InequalityError::Scale(ScaleError::NotAPoint(_)))
        ));
        assert!(matches!(
            eval_conclusion(&case, &f),
            Err(InequalityError::Scale(ScaleError::NotAPoint(_)))
        ));
    }

    #[test]
    fn negative_values_fail_without_error() {
        let f = grid(&[0.0, 1.0, 2.0], &[-1.0, 0.5, 2.0]);
        let case = TheoremCase::new(TheoremId::Qi32, 1.5, 0.0, 2.0).unwrap();
        let report = verify(&case, &f).unwrap();
        assert!(!report.hypothesis.nonneg_ok);
        assert_eq!(report.verdict, Verdict::HypothesisFailed);
    }

    #[test]
    fn report_omits_witness_unless_violated() {
        let f = grid(&[0.0, 1.0], &[1.0, 2.0]);
        let case = TheoremCase::new(TheoremId::Qi31, 3.0, 0.0, 1.0).unwrap();
        let report = verify(&case, &f).unwrap();
        assert!(report.witness.is_none());
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("witness").is_none());
        assert_eq!(json["verdict"], "holds");
    }
}
