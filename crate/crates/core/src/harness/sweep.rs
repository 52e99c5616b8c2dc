use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{gen_scale_with, gen_witness_with};
use super::{log_uniform, trial_seed, HarnessError, ScaleSpec, WitnessSpec};
use crate::calculus::GridFunction;
use crate::inequalities::{
    holds_within_tolerance, verify, TheoremCase, TheoremId, Verdict, VerificationReport,
};
use crate::timescale::TimeScale;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentChoice {
    Fixed(f64),
    /// Uniform draw from `[lo, hi]`.
    Uniform(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalChoice {
    /// `a = min T`, `b = max T`.
    Whole,
    /// Random `a < b` drawn from the scale's points.
    RandomSub,
}

/// What each trial verifies: a theorem with exponent and interval rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseTemplate {
    pub id: TheoremId,
    pub exponent: ExponentChoice,
    pub interval: IntervalChoice,
}

impl CaseTemplate {
    /// Random sub-intervals and exponents in `[floor, floor + 3]`.
    pub fn randomized(id: TheoremId) -> Self {
        let floor = id.exponent_floor();
        Self {
            id,
            exponent: ExponentChoice::Uniform(floor, floor + 3.0),
            interval: IntervalChoice::RandomSub,
        }
    }

    pub fn fixed(id: TheoremId, exponent: f64) -> Self {
        Self {
            id,
            exponent: ExponentChoice::Fixed(exponent),
            interval: IntervalChoice::RandomSub,
        }
    }

    fn draw<R: Rng + ?Sized>(
        &self,
        ts: &TimeScale,
        rng: &mut R,
    ) -> Result<TheoremCase, HarnessError> {
        let exponent = match self.exponent {
            ExponentChoice::Fixed(e) => e,
            ExponentChoice::Uniform(lo, hi) if lo < hi => rng.gen_range(lo..=hi),
            ExponentChoice::Uniform(lo, _) => lo,
        };
        let (a, b) = match self.interval {
            IntervalChoice::Whole => (ts.min(), ts.max()),
            IntervalChoice::RandomSub => {
                if ts.len() < 2 {
                    return Err(HarnessError::BadSpec(
                        "random sub-intervals need two points".into(),
                    ));
                }
                let ia = rng.gen_range(0..ts.last_index());
                let ib = rng.gen_range(ia + 1..=ts.last_index());
                (ts.point(ia), ts.point(ib))
            }
        };
        Ok(TheoremCase::new(self.id, exponent, a, b)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub template: CaseTemplate,
    pub scale: ScaleSpec,
    pub witness: WitnessSpec,
    pub trials: usize,
    pub seed: u64,
    /// Fewer admissible witnesses than this is reported as starvation.
    pub min_admissible: usize,
}

impl SweepConfig {
    /// Mixed scales, steep witnesses, and an 80% admissibility floor.
    pub fn new(template: CaseTemplate, trials: usize, seed: u64) -> Self {
        Self {
            template,
            scale: ScaleSpec::default(),
            witness: WitnessSpec::default(),
            trials,
            seed,
            min_admissible: (trials * 4).div_ceil(5),
        }
    }
}

/// One CSV row per trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub theorem: TheoremId,
    pub exponent: f64,
    pub a: f64,
    pub b: f64,
    pub n_points: usize,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    /// `holds`, `violated`, `hypothesis-failed` or `starved`.
    pub verdict: String,
    pub worst_slack: Option<f64>,
    pub saturated: bool,
}

impl TrialRow {
    pub fn from_report(trial: usize, report: &VerificationReport) -> Self {
        Self {
            trial,
            theorem: report.case.id,
            exponent: report.case.exponent,
            a: report.case.a,
            b: report.case.b,
            n_points: report.n_points,
            lhs: Some(report.lhs),
            rhs: Some(report.rhs),
            margin: Some(report.margin),
            verdict: report.verdict.as_str().to_string(),
            worst_slack: report.worst_slack(),
            saturated: report.saturated(),
        }
    }

    fn starved(trial: usize, case: &TheoremCase, n_points: usize) -> Self {
        Self {
            trial,
            theorem: case.id,
            exponent: case.exponent,
            a: case.a,
            b: case.b,
            n_points,
            lhs: None,
            rhs: None,
            margin: None,
            verdict: "starved".to_string(),
            worst_slack: None,
            saturated: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub theorem: TheoremId,
    pub seed: u64,
    pub trials: usize,
    pub min_admissible: usize,
    pub admissible: usize,
    pub starved: usize,
    pub holds: usize,
    pub violated: usize,
    pub hypothesis_failed: usize,
    /// Hypothesis-failed trials whose conclusion also failed. Only the
    /// counterexample search produces these.
    pub conclusion_failures: usize,
    /// Smallest margin among `holds` verdicts.
    pub worst_margin: Option<f64>,
    /// Smallest margin overall, divided by `max(1, |lhs|, |rhs|)`.
    pub worst_relative_margin: Option<f64>,
    /// Full reports, witnesses included, for every violated verdict.
    pub violations: Vec<VerificationReport>,
    pub rows: Vec<TrialRow>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SweepReport {
    fn aggregate(
        theorem: TheoremId,
        seed: u64,
        min_admissible: usize,
        outcomes: Vec<Outcome>,
    ) -> Self {
        let mut report = SweepReport {
            theorem,
            seed,
            trials: outcomes.len(),
            min_admissible,
            admissible: 0,
            starved: 0,
            holds: 0,
            violated: 0,
            hypothesis_failed: 0,
            conclusion_failures: 0,
            worst_margin: None,
            worst_relative_margin: None,
            violations: Vec::new(),
            rows: Vec::with_capacity(outcomes.len()),
            wall_time: Duration::ZERO,
        };
        for (trial, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Outcome::Starved { case, n_points } => {
                    report.starved += 1;
                    report.rows.push(TrialRow::starved(trial, &case, n_points));
                }
                Outcome::Verified(verified) => {
                    report.rows.push(TrialRow::from_report(trial, &verified));
                    let relative = verified.margin
                        / crate::inequalities::problem_scale(verified.lhs, verified.rhs);
                    report.worst_relative_margin = Some(
                        report
                            .worst_relative_margin
                            .map_or(relative, |w| w.min(relative)),
                    );
                    match verified.verdict {
                        Verdict::Holds => {
                            report.admissible += 1;
                            report.holds += 1;
                            report.worst_margin = Some(
                                report
                                    .worst_margin
                                    .map_or(verified.margin, |w| w.min(verified.margin)),
                            );
                        }
                        Verdict::Violated => {
                            report.admissible += 1;
                            report.violated += 1;
                            report.violations.push(*verified);
                        }
                        Verdict::HypothesisFailed => {
                            report.hypothesis_failed += 1;
                            if !holds_within_tolerance(verified.lhs, verified.rhs) {
                                report.conclusion_failures += 1;
                            }
                        }
                    }
                }
            }
        }
        report
    }
}

enum Outcome {
    Verified(Box<VerificationReport>),
    Starved { case: TheoremCase, n_points: usize },
}

fn run_trial(config: &SweepConfig, trial: usize) -> Result<Outcome, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, trial));
    let ts = Arc::new(gen_scale_with(&config.scale, &mut rng)?);
    let case = config.template.draw(&ts, &mut rng)?;
    match gen_witness_with(&case, &ts, &config.witness, &mut rng) {
        Ok(f) => Ok(Outcome::Verified(Box::new(verify(&case, &f)?))),
        Err(HarnessError::Starved { .. }) => {
            let (ia, ib) = ts.interval_indices(case.a, case.b)?;
            Ok(Outcome::Starved {
                case,
                n_points: ib - ia + 1,
            })
        }
        Err(other) => Err(other),
    }
}

/// Verifies `config.trials` generated (scale, witness) pairs. Trials run in
/// parallel; the report is independent of scheduling.
pub fn sweep(config: &SweepConfig) -> Result<SweepReport, HarnessError> {
    if config.trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    config.scale.validate()?;
    let started = Instant::now();
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, trial))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = SweepReport::aggregate(
        config.template.id,
        config.seed,
        config.min_admissible,
        outcomes,
    );
    report.wall_time = started.elapsed();
    if report.admissible < config.min_admissible {
        return Err(HarnessError::GeneratorStarvation(Box::new(report)));
    }
    Ok(report)
}

fn search_trial(template: &CaseTemplate, seed: u64, trial: usize) -> Result<Outcome, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial));
    // Long unit-ish lattices are where small functions break the conclusion.
    let length = rng.gen_range(3..=12) as f64;
    let h = if rng.gen_bool(0.5) { 1.0 } else { 0.5 };
    let ts = Arc::new(TimeScale::h_lattice(0.0, length, h)?);
    let case = CaseTemplate {
        interval: IntervalChoice::Whole,
        ..*template
    }
    .draw(&ts, &mut rng)?;
    for _ in 0..super::DEFAULT_BUDGET {
        let c = log_uniform(&mut rng, 1e-3, 1.0);
        let slope = if rng.gen_bool(0.5) {
            0.0
        } else {
            c * log_uniform(&mut rng, 1e-4, 1e-2)
        };
        let f = GridFunction::tabulate(Arc::clone(&ts), |x| c + slope * x)?;
        let report = verify(&case, &f)?;
        // Admissible draws are not counterexample candidates.
        if report.verdict == Verdict::HypothesisFailed {
            return Ok(Outcome::Verified(Box::new(report)));
        }
    }
    Ok(Outcome::Starved {
        case,
        n_points: ts.len(),
    })
}

/// Non-vacuity probe: nonnegative nondecreasing functions that fail the
/// hypothesis, recording how often the conclusion fails with them.
pub fn counterexample_search(
    template: &CaseTemplate,
    trials: usize,
    seed: u64,
) -> Result<SweepReport, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let started = Instant::now();
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| search_trial(template, seed, trial))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = SweepReport::aggregate(template.id, seed, 0, outcomes);
    report.wall_time = started.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_rejected() {
        let config = SweepConfig::new(CaseTemplate::randomized(TheoremId::Qi31), 0, 0);
        assert_eq!(sweep(&config), Err(HarnessError::ZeroTrials));
        assert_eq!(
            counterexample_search(&config.template, 0, 0),
            Err(HarnessError::ZeroTrials)
        );
    }

    #[test]
    fn small_sweep_is_sound_and_deterministic() {
        for id in TheoremId::ALL {
            let config = SweepConfig::new(CaseTemplate::randomized(id), 60, 42);
            let first = sweep(&config).unwrap();
            assert_eq!(first.violated, 0, "{id}: {:?}", first.violations.first());
            assert_eq!(first.rows.len(), 60);
            let second = sweep(&config).unwrap();
            assert_eq!(first.rows, second.rows);
        }
    }

    #[test]
    fn starvation_is_reported() {
        let mut config = SweepConfig::new(CaseTemplate::fixed(TheoremId::Qi31, 8.0), 10, 1);
        config.witness = WitnessSpec {
            strategy: super::super::WitnessStrategy::Rejection,
            initial: (0.0, 0.01),
            slope: (1e-3, 1e-3),
            budget: 5,
        };
        config.scale = ScaleSpec::HLattice {
            a: 0.0,
            b: 10.0,
            h: 1.0,
        };
        config.template.interval = IntervalChoice::Whole;
        match sweep(&config) {
            Err(HarnessError::GeneratorStarvation(report)) => {
                assert_eq!(report.starved, 10);
                assert!(report.rows.iter().all(|r| r.verdict == "starved"));
            }
            other => panic!("expected starvation, got {other:?}"),
        }
    }

    #[test]
    fn search_finds_conclusion_failures() {
        for id in TheoremId::ALL {
            let report = counterexample_search(&CaseTemplate::randomized(id), 50, 3).unwrap();
            assert_eq!(report.admissible, 0);
            assert!(report.conclusion_failures > 0, "{id}");
        }
    }
}
