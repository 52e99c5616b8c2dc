use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::calculus::GridFunction;
use crate::classical::{classical_case, ClassicalId};
use crate::inequalities::{check_hypothesis, eval_conclusion, TheoremCase, TheoremId};
use crate::timescale::{ScaleError, TimeScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "kebab-case")]
pub enum RefineTarget {
    Theorem(TheoremId),
    Classical(ClassicalId),
}

/// A refinement run: one evaluation per step in `hs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineStudy {
    pub target: RefineTarget,
    pub exponent: f64,
    pub a: f64,
    pub b: f64,
    /// Strictly decreasing lattice steps, each dividing `b - a`.
    pub hs: Vec<f64>,
    /// Closed-form margin of the continuum display, when known.
    pub continuum_margin: Option<f64>,
    pub tolerance: f64,
}

impl RefineStudy {
    /// Steps `2^-k_min, ..., 2^-k_max`.
    pub fn dyadic(
        target: RefineTarget,
        exponent: f64,
        a: f64,
        b: f64,
        k_min: i32,
        k_max: i32,
    ) -> Self {
        Self {
            target,
            exponent,
            a,
            b,
            hs: (k_min..=k_max).map(|k| 2f64.powi(-k)).collect(),
            continuum_margin: None,
            tolerance: 1e-3,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::BadSequence(msg));
        if self.hs.is_empty() {
            return bad("empty step sequence".into());
        }
        if let Some(h) = self.hs.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return bad(format!("step {h} is not positive"));
        }
        if let Some(w) = self.hs.windows(2).find(|w| w[1] >= w[0]) {
            return bad(format!(
                "steps must strictly decrease, got {} then {}",
                w[0], w[1]
            ));
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance {} is not positive", self.tolerance));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefineLevel {
    pub h: f64,
    pub n_points: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub bracket: f64,
    pub worst_slack: Option<f64>,
    pub hypothesis_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub target: RefineTarget,
    pub exponent: f64,
    pub levels: Vec<RefineLevel>,
    /// `|margin(h_{k+1}) - margin(h_k)|`.
    pub differences: Vec<f64>,
    pub continuum_margin: Option<f64>,
    /// `|margin(h_last) - continuum_margin|`.
    pub final_gap: Option<f64>,
    pub matches_continuum: Option<bool>,
    pub converged: bool,
}

fn lattice(a: f64, b: f64, h: f64) -> Result<TimeScale, HarnessError> {
    let ts = TimeScale::h_lattice(a, b, h)?;
    if ts.max() != b {
        return Err(HarnessError::Inequality(ScaleError::BadStep(h).into()));
    }
    Ok(ts)
}

fn theorem_level(
    id: TheoremId,
    study: &RefineStudy,
    h: f64,
    f: &dyn Fn(f64) -> f64,
) -> Result<RefineLevel, HarnessError> {
    let ts = Arc::new(lattice(study.a, study.b, h)?);
    let case = TheoremCase::new(id, study.exponent, study.a, study.b)?;
    let grid = GridFunction::tabulate(Arc::clone(&ts), f)?;
    let hypothesis = check_hypothesis(&case, &grid)?;
    let conclusion = eval_conclusion(&case, &grid)?;
    Ok(RefineLevel {
        h,
        n_points: ts.len(),
        lhs: conclusion.lhs,
        rhs: conclusion.rhs,
        margin: conclusion.margin(),
        bracket: conclusion.bracket,
        worst_slack: hypothesis.worst_slack(),
        hypothesis_holds: hypothesis.holds,
    })
}

/// Converged when the last three successive differences do not grow (up to
/// rounding noise) and the final difference is below tolerance.
fn is_converged(levels: &[RefineLevel], differences: &[f64], tolerance: f64) -> bool {
    let Some(&last) = differences.last() else {
        return false;
    };
    let scale = levels.iter().map(|l| l.margin.abs()).fold(1.0, f64::max);
    let noise = 1e-12 * scale;
    let tail = &differences[differences.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1] <= w[0] + noise) && last < tolerance
}

/// Evaluates the target on the h-lattice of `[a, b]` for each step. Classical
/// targets need the derivative `df` for their hypothesis slack.
pub fn refine_study(
    study: &RefineStudy,
    f: &dyn Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
) -> Result<ConvergenceReport, HarnessError> {
    study.validate()?;
    let levels = study
        .hs
        .iter()
        .map(|&h| match study.target {
            RefineTarget::Theorem(id) => theorem_level(id, study, h, f),
            RefineTarget::Classical(id) => {
                let df = df.ok_or_else(|| {
                    HarnessError::BadSpec("classical refinement needs a derivative".into())
                })?;
                let eval = classical_case(id, study.exponent, study.a, study.b, f, df, h)?;
                Ok(RefineLevel {
                    h,
                    n_points: eval.n_points,
                    lhs: eval.lhs,
                    rhs: eval.rhs,
                    margin: eval.margin(),
                    bracket: eval.bracket,
                    worst_slack: Some(eval.worst_slack),
                    hypothesis_holds: eval.worst_slack >= 0.0,
                })
            }
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let differences: Vec<f64> = levels
        .windows(2)
        .map(|w| (w[1].margin - w[0].margin).abs())
        .collect();
    let last_margin = levels.last().map(|l| l.margin).unwrap_or(f64::NAN);
    let final_gap = study.continuum_margin.map(|m| (last_margin - m).abs());
    Ok(ConvergenceReport {
        target: study.target,
        exponent: study.exponent,
        converged: is_converged(&levels, &differences, study.tolerance),
        matches_continuum: final_gap.map(|g| g <= study.tolerance),
        continuum_margin: study.continuum_margin,
        final_gap,
        differences,
        levels,
    })
}
