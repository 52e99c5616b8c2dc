use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{log_uniform, HarnessError, DEFAULT_BUDGET};
use crate::calculus::GridFunction;
use crate::inequalities::{
    check_domain, check_hypothesis, pointwise_terms, TheoremCase, TheoremId,
};
use crate::timescale::TimeScale;

/// Largest coordinate a mixed-family scale may reach.
const MIXED_COORDINATE_CAP: f64 = 40.0;

/// How to build a time scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ScaleSpec {
    Explicit {
        points: Vec<f64>,
    },
    HLattice {
        a: f64,
        b: f64,
        h: f64,
    },
    QPower {
        base: f64,
        q: f64,
        k_min: i32,
        k_max: i32,
    },
    /// `start` followed by cumulative gaps drawn log-uniformly in
    /// `[min_gap, max_gap]`.
    RandomScattered {
        min_size: usize,
        max_size: usize,
        start: f64,
        min_gap: f64,
        max_gap: f64,
    },
    /// Each draw picks an h-lattice, a q-power scale or a random scattered
    /// scale with randomized parameters and at most `max_size` points.
    Mixed {
        max_size: usize,
    },
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec::Mixed { max_size: 24 }
    }
}

impl ScaleSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::BadSpec(msg.to_string()));
        match *self {
            ScaleSpec::RandomScattered {
                min_size,
                max_size,
                start,
                min_gap,
                max_gap,
            } => {
                if min_size == 0 || min_size > max_size {
                    return bad("size bounds must satisfy 1 <= min_size <= max_size");
                }
                if !(min_gap > 0.0 && min_gap <= max_gap && max_gap.is_finite()) {
                    return bad("gaps must satisfy 0 < min_gap <= max_gap");
                }
                if !start.is_finite() {
                    return bad("start must be finite");
                }
                Ok(())
            }
            ScaleSpec::Mixed { max_size } if max_size < 2 => bad("mixed scales need max_size >= 2"),
            _ => Ok(()),
        }
    }
}

pub fn gen_scale(spec: &ScaleSpec, seed: u64) -> Result<TimeScale, HarnessError> {
    gen_scale_with(spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn gen_scale_with<R: Rng + ?Sized>(
    spec: &ScaleSpec,
    rng: &mut R,
) -> Result<TimeScale, HarnessError> {
    spec.validate()?;
    let ts = match *spec {
        ScaleSpec::Explicit { ref points } => TimeScale::from_points(points.clone())?,
        ScaleSpec::HLattice { a, b, h } => TimeScale::h_lattice(a, b, h)?,
        ScaleSpec::QPower {
            base,
            q,
            k_min,
            k_max,
        } => TimeScale::q_power(base, q, k_min, k_max)?,
        ScaleSpec::RandomScattered {
            min_size,
            max_size,
            start,
            min_gap,
            max_gap,
        } => {
            let n = rng.gen_range(min_size..=max_size);
            scattered(rng, n, start, min_gap, max_gap)?
        }
        ScaleSpec::Mixed { max_size } => {
            let n = rng.gen_range(2..=max_size);
            match rng.gen_range(0..3) {
                0 => {
                    let h = log_uniform(rng, 0.05, 1.0);
                    let a = rng.gen_range(0.0..2.0);
                    let lattice = TimeScale::h_lattice(a, a + (n - 1) as f64 * h, h)?;
                    if lattice.len() >= 2 {
                        lattice
                    } else {
                        TimeScale::h_lattice(a, a + h, h)?
                    }
                }
                1 => {
                    let q: f64 = rng.gen_range(1.1..2.5);
                    let base = log_uniform(rng, 0.05, 1.0);
                    let reach = ((MIXED_COORDINATE_CAP / base).ln() / q.ln()).floor() as i32;
                    let k_max = (n as i32 - 1).min(reach).max(1);
                    TimeScale::q_power(base, q, 0, k_max)?
                }
                _ => {
                    let start = rng.gen_range(0.0..2.0);
                    scattered(rng, n, start, 1e-2, 3.0)?
                }
            }
        }
    };
    Ok(ts)
}

fn scattered<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    start: f64,
    min_gap: f64,
    max_gap: f64,
) -> Result<TimeScale, HarnessError> {
    let mut points = Vec::with_capacity(n);
    let mut x = start;
    points.push(x);
    for _ in 1..n {
        x += log_uniform(rng, min_gap, max_gap);
        points.push(x);
    }
    Ok(TimeScale::from_points(points)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessStrategy {
    /// Increasing profile scaled just past the smallest admissible amplitude.
    SteepFamily,
    /// Random nondecreasing functions, kept only if the checker accepts them.
    Rejection,
    /// Profiles with zero pointwise slack.
    EqualityCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub strategy: WitnessStrategy,
    /// Range of the starting value at the scale minimum.
    pub initial: (f64, f64),
    /// Range of the random slope added on top of the theorem's slope floor.
    pub slope: (f64, f64),
    pub budget: usize,
}

impl Default for WitnessSpec {
    fn default() -> Self {
        Self {
            strategy: WitnessStrategy::SteepFamily,
            initial: (0.1, 10.0),
            slope: (0.05, 5.0),
            budget: DEFAULT_BUDGET,
        }
    }
}

impl WitnessSpec {
    pub fn with_strategy(strategy: WitnessStrategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let (i0, i1) = self.initial;
        let (s0, s1) = self.slope;
        if !(i0 >= 0.0 && i0 <= i1 && i1.is_finite()) {
            return Err(HarnessError::BadSpec(
                "initial range must satisfy 0 <= lo <= hi".into(),
            ));
        }
        if !(s0 > 0.0 && s0 <= s1 && s1.is_finite()) {
            return Err(HarnessError::BadSpec(
                "slope range must satisfy 0 < lo <= hi".into(),
            ));
        }
        if self.budget == 0 {
            return Err(HarnessError::BadSpec(
                "attempt budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Largest value a witness may take for exponent `e`; keeps `f^{e+2}` and
/// the integral powers comfortably inside `f64`.
fn value_cap(e: f64) -> f64 {
    10f64.powf(200.0 / (e + 2.0))
}

/// Draws a witness that passes `check_hypothesis` for `case` on `ts`, or
/// reports starvation once the attempt budget is spent.
pub fn gen_witness(
    case: &TheoremCase,
    ts: &Arc<TimeScale>,
    spec: &WitnessSpec,
    seed: u64,
) -> Result<GridFunction, HarnessError> {
    gen_witness_with(case, ts, spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn gen_witness_with<R: Rng + ?Sized>(
    case: &TheoremCase,
    ts: &Arc<TimeScale>,
    spec: &WitnessSpec,
    rng: &mut R,
) -> Result<GridFunction, HarnessError> {
    spec.validate()?;
    case.validate()?;
    ts.interval_indices(case.a, case.b)?;
    let attempts = match spec.strategy {
        WitnessStrategy::EqualityCase => 1,
        _ => spec.budget,
    };
    for _ in 0..attempts {
        let candidate = match spec.strategy {
            WitnessStrategy::SteepFamily => steep_candidate(case, ts, spec, rng)?,
            WitnessStrategy::Rejection => Some(rejection_candidate(ts, spec, rng)?),
            WitnessStrategy::EqualityCase => Some(equality_profile(case, ts, spec)?),
        };
        let Some(f) = candidate else { continue };
        let cap = value_cap(case.exponent);
        if f.values().iter().any(|v| v.abs() > cap) {
            continue;
        }
        if check_hypothesis(case, &f)?.holds {
            return Ok(f);
        }
    }
    Err(HarnessError::Starved { attempts })
}

/// Minimum growth rate the pointwise condition imposes on `f(σ(y)) - f(y)`
/// per unit step, where it is explicit.
fn slope_floor(case: &TheoremCase, ts: &TimeScale, i: usize) -> f64 {
    let e = case.exponent;
    match case.id {
        TheoremId::Qi34 => e,
        TheoremId::Qi35 => (e - 2.0) * (ts.sigma_at(i) - case.a).max(0.0).powf(e - 3.0),
        _ => 0.0,
    }
}

/// Strictly increasing positive profile built by the forward recursion
/// `f(σ(x)) = f(x) + μ(x) s(x)`.
fn forward_profile<R: Rng + ?Sized>(
    case: &TheoremCase,
    ts: &Arc<TimeScale>,
    spec: &WitnessSpec,
    rng: &mut R,
) -> Result<GridFunction, HarnessError> {
    let (i0, i1) = spec.initial;
    let (s0, s1) = spec.slope;
    let mut values = Vec::with_capacity(ts.len());
    let mut v = log_uniform(rng, i0.max(1e-3), i1.max(1e-3));
    values.push(v);
    for i in 0..ts.last_index() {
        let slope = slope_floor(case, ts, i) + log_uniform(rng, s0, s1);
        v += ts.mu_at(i) * slope;
        values.push(v);
    }
    Ok(GridFunction::new(Arc::clone(ts), values)?)
}

/// Every pointwise condition is homogeneous: scaling `f` by `λ` multiplies
/// its left side by one more power of `λ` than its right side. The smallest
/// admissible amplitude is therefore `max R/L` over the checked points.
/// `None` when some point can never be satisfied.
fn minimal_amplitude(case: &TheoremCase, f: &GridFunction) -> Option<f64> {
    let ts = f.scale();
    let (ia, ib) = ts.interval_indices(case.a, case.b).ok()?;
    let mut needed: f64 = 0.0;
    for i in check_domain(case.id, ia, ib) {
        let (lhs, rhs) = pointwise_terms(case, f, i);
        if rhs <= 0.0 {
            continue;
        }
        if !(lhs > 0.0) {
            return None;
        }
        needed = needed.max(rhs / lhs);
    }
    Some(needed)
}

fn steep_candidate<R: Rng + ?Sized>(
    case: &TheoremCase,
    ts: &Arc<TimeScale>,
    spec: &WitnessSpec,
    rng: &mut R,
) -> Result<Option<GridFunction>, HarnessError> {
    let profile = forward_profile(case, ts, spec, rng)?;
    let Some(needed) = minimal_amplitude(case, &profile) else {
        return Ok(None);
    };
    // Half the draws sit barely above the admissible boundary.
    let overshoot = if rng.gen_bool(0.5) {
        log_uniform(rng, 1e-8, 1e-3)
    } else {
        log_uniform(rng, 1e-3, 2.0)
    };
    let amplitude = if needed > 0.0 {
        needed * (1.0 + overshoot)
    } else {
        1.0
    };
    if !amplitude.is_finite() {
        return Ok(None);
    }
    Ok(profile.map(|v| v * amplitude).ok())
}

fn rejection_candidate<R: Rng + ?Sized>(
    ts: &Arc<TimeScale>,
    spec: &WitnessSpec,
    rng: &mut R,
) -> Result<GridFunction, HarnessError> {
    let (i0, i1) = spec.initial;
    let (_, s1) = spec.slope;
    let mut v = rng.gen_range(i0..=i1);
    let mut values = Vec::with_capacity(ts.len());
    values.push(v);
    for i in 0..ts.last_index() {
        // Occasional plateaus keep the draws honest about monotonicity only.
        if !rng.gen_bool(0.2) {
            v += ts.mu_at(i) * rng.gen_range(0.0..=s1);
        }
        values.push(v);
    }
    Ok(GridFunction::new(Arc::clone(ts), values)?)
}

/// Zero-slack profiles. Where the right-hand side vanishes with `f` the zero
/// function is used; the growth-floor theorems get the profile that meets
/// their floor with equality.
fn equality_profile(
    case: &TheoremCase,
    ts: &Arc<TimeScale>,
    spec: &WitnessSpec,
) -> Result<GridFunction, HarnessError> {
    let e = case.exponent;
    let start = spec.initial.0;
    let grid = match case.id {
        TheoremId::Qi34 => {
            let x0 = ts.min();
            GridFunction::tabulate(Arc::clone(ts), |x| start + e * (x - x0))?
        }
        TheoremId::Qi35 => {
            let mut values = Vec::with_capacity(ts.len());
            let mut v = start;
            values.push(v);
            for i in 0..ts.last_index() {
                v += ts.mu_at(i) * slope_floor(case, ts, i);
                values.push(v);
            }
            GridFunction::new(Arc::clone(ts), values)?
        }
        // p = 3 turns the condition into f^Δ >= σ^Δ, met with equality by σ.
        TheoremId::Qi33 if e == 3.0 => {
            let values = (0..ts.len()).map(|i| start + ts.sigma_at(i)).collect();
            GridFunction::new(Arc::clone(ts), values)?
        }
        _ => GridFunction::constant(Arc::clone(ts), 0.0)?,
    };
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_spec() {
        let spec = ScaleSpec::HLattice {
            a: 0.0,
            b: 1.0,
            h: 0.1,
        };
        assert_eq!(gen_scale(&spec, 0).unwrap().len(), 11);
    }

    #[test]
    fn scattered_spec() {
        let spec = ScaleSpec::RandomScattered {
            min_size: 5,
            max_size: 5,
            start: 0.0,
            min_gap: 0.1,
            max_gap: 2.0,
        };
        let ts = gen_scale(&spec, 3).unwrap();
        assert_eq!(ts.len(), 5);
        for w in ts.points().windows(2) {
            let gap = w[1] - w[0];
            assert!((0.1 * (1.0 - 1e-12)..=2.0 * (1.0 + 1e-12)).contains(&gap));
        }
        assert_eq!(gen_scale(&spec, 3).unwrap(), ts);
    }

    #[test]
    fn rejects_zero_gap() {
        let spec = ScaleSpec::RandomScattered {
            min_size: 2,
            max_size: 5,
            start: 0.0,
            min_gap: 0.0,
            max_gap: 2.0,
        };
        assert!(matches!(gen_scale(&spec, 0), Err(HarnessError::BadSpec(_))));
    }

    #[test]
    fn mixed_scales_stay_in_range() {
        let spec = ScaleSpec::default();
        for seed in 0..300 {
            let ts = gen_scale(&spec, seed).unwrap();
            assert!(ts.len() >= 2 && ts.len() <= 24, "seed {seed}");
            assert!(ts.max() <= MIXED_COORDINATE_CAP * 1.5 + 100.0);
        }
    }

    #[test]
    fn steep_witness_for_qi_3_4_on_lattice() {
        let ts = Arc::new(TimeScale::h_lattice(0.0, 5.0, 1.0).unwrap());
        let case = TheoremCase::new(TheoremId::Qi34, 2.0, 0.0, 5.0).unwrap();
        let f = gen_witness(&case, &ts, &WitnessSpec::default(), 11).unwrap();
        assert!(check_hypothesis(&case, &f).unwrap().holds);
    }

    #[test]
    fn steep_witnesses_exist_for_every_theorem() {
        let ts = Arc::new(TimeScale::from_points(vec![0.0, 0.3, 1.0, 1.1, 2.5, 4.0]).unwrap());
        for id in TheoremId::ALL {
            for e in [id.exponent_floor(), id.exponent_floor() + 1.7] {
                let case = TheoremCase::new(id, e, 0.3, 2.5).unwrap();
                let f = gen_witness(&case, &ts, &WitnessSpec::default(), 5)
                    .unwrap_or_else(|err| panic!("{id} e={e}: {err}"));
                assert!(check_hypothesis(&case, &f).unwrap().holds);
            }
        }
    }

    #[test]
    fn equality_profiles_are_admissible_and_tight() {
        let ts = Arc::new(TimeScale::from_points(vec![0.0, 0.5, 1.5, 1.75, 3.0]).unwrap());
        let spec = WitnessSpec::with_strategy(WitnessStrategy::EqualityCase);
        for id in TheoremId::ALL {
            let e = id.exponent_floor();
            let case = TheoremCase::new(id, e, 0.0, 3.0).unwrap();
            let f = gen_witness(&case, &ts, &spec, 0).unwrap();
            let report = check_hypothesis(&case, &f).unwrap();
            assert!(report.holds, "{id}");
            let worst = report.worst_slack().unwrap();
            assert!(worst.abs() <= 1e-12, "{id}: {worst}");
        }
    }

    #[test]
    fn rejection_starves_on_demanding_case() {
        let ts = Arc::new(TimeScale::h_lattice(0.0, 10.0, 1.0).unwrap());
        let case = TheoremCase::new(TheoremId::Qi31, 8.0, 0.0, 10.0).unwrap();
        let spec = WitnessSpec {
            strategy: WitnessStrategy::Rejection,
            initial: (0.0, 0.01),
            slope: (1e-3, 1e-3),
            budget: 50,
        };
        assert_eq!(
            gen_witness(&case, &ts, &spec, 1),
            Err(HarnessError::Starved { attempts: 50 })
        );
    }

    #[test]
    fn witnesses_are_deterministic() {
        let ts = Arc::new(gen_scale(&ScaleSpec::default(), 9).unwrap());
        let case = TheoremCase::new(TheoremId::Qi32, 1.5, ts.min(), ts.max()).unwrap();
        let spec = WitnessSpec::default();
        assert_eq!(
            gen_witness(&case, &ts, &spec, 4).unwrap(),
            gen_witness(&case, &ts, &spec, 4).unwrap()
        );
    }
}
