use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{log_uniform, trial_seed, HarnessError};
use crate::calculus::GridFunction;
use crate::timescale::TimeScale;

const IDENTITY_TOLERANCE: f64 = 1e-12;
const SANDWICH_TOLERANCE: f64 = 1e-10;
const SANDWICH_EXPONENTS: [f64; 4] = [1.5, 2.0, 3.0, 5.5];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    /// Individual evaluations performed.
    pub cases: usize,
    /// Largest relative error (or relative sandwich breach) observed.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub scales: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Error of `x` against `y`, relative to the size of the operands that
/// produced them. Cancellation in a difference quotient is bounded by the
/// operands, not by the (possibly tiny) result.
fn relative(x: f64, y: f64, magnitude: f64) -> f64 {
    let diff = (x - y).abs();
    if diff == 0.0 {
        return 0.0;
    }
    let m = magnitude.max(x.abs()).max(y.abs());
    if m > 0.0 {
        diff / m
    } else {
        diff
    }
}

/// Per-check running maximum; NaN becomes infinity so it always fails.
#[derive(Clone)]
struct Tally {
    max: Vec<f64>,
    cases: Vec<usize>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Self {
            max: vec![0.0; n],
            cases: vec![0; n],
        }
    }

    fn record(&mut self, k: usize, err: f64) {
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.max[k] = self.max[k].max(err);
        self.cases[k] += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        for k in 0..self.max.len() {
            self.max[k] = self.max[k].max(other.max[k]);
            self.cases[k] += other.cases[k];
        }
        self
    }
}

fn random_scale(rng: &mut ChaCha8Rng) -> Result<Arc<TimeScale>, HarnessError> {
    let n = rng.gen_range(2..=200);
    let mut x = rng.gen_range(-5.0..5.0);
    let mut points = Vec::with_capacity(n);
    points.push(x);
    for _ in 1..n {
        x += log_uniform(rng, 1e-3, 10.0);
        points.push(x);
    }
    Ok(Arc::new(TimeScale::from_points(points)?))
}

fn random_values(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn grid(ts: &Arc<TimeScale>, values: Vec<f64>) -> Result<GridFunction, HarnessError> {
    Ok(GridFunction::new(Arc::clone(ts), values)?)
}

fn finish(names: &[&'static str], tally: Tally, tolerance: f64) -> Vec<IdentityCheck> {
    names
        .iter()
        .enumerate()
        .map(|(k, &name)| IdentityCheck {
            name,
            cases: tally.cases[k],
            max_error: tally.max[k],
            tolerance,
            passed: tally.max[k] <= tolerance,
        })
        .collect()
}

fn run_parallel(
    cases: usize,
    seed: u64,
    checks: usize,
    body: impl Fn(&mut ChaCha8Rng, &mut Tally) -> Result<(), HarnessError> + Sync,
) -> Result<Tally, HarnessError> {
    (0..cases)
        .into_par_iter()
        .map(|case| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, case));
            let mut tally = Tally::new(checks);
            body(&mut rng, &mut tally)?;
            Ok(tally)
        })
        .try_reduce(|| Tally::new(checks), |x, y| Ok(x.merge(y)))
}

const IDENTITY_NAMES: [&str; 7] = [
    "single-step-integral",
    "ftc-delta",
    "ftc-nabla",
    "integral-additivity",
    "product-rule-sigma-first",
    "product-rule-sigma-second",
    "quotient-rule",
];

/// Exact identities of the calculus over `cases` random scales, checked at
/// every point: the one-step integral, both fundamental theorems, additivity,
/// both product-rule forms and the quotient rule.
#[allow(clippy::needless_range_loop)]
pub fn identity_suite(cases: usize, seed: u64) -> Result<IdentityReport, HarnessError> {
    if cases == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let tally = run_parallel(cases, seed, IDENTITY_NAMES.len(), |rng, tally| {
        let ts = random_scale(rng)?;
        let n = ts.len();
        let f = grid(&ts, random_values(rng, n, -10.0, 10.0))?;
        let g = grid(&ts, random_values(rng, n, -10.0, 10.0))?;
        let positive = grid(&ts, random_values(rng, n, 0.5, 10.0))?;
        let v = f.values();

        for i in 0..ts.last_index() {
            let t = ts.point(i);
            let s = ts.sigma_at(i);
            let mu = ts.mu_at(i);
            let one_step = f.delta_integral(t, s)?;
            tally.record(0, relative(one_step, v[i] * mu, 0.0));
        }

        let anchor = ts.point(rng.gen_range(0..n));
        let cum = f.cumulative_delta(anchor)?;
        for i in 0..ts.last_index() {
            let mu = ts.mu_at(i);
            let (lo, hi) = (cum.at(i), cum.at(i + 1));
            let magnitude = (lo.abs() + hi.abs()) / mu;
            tally.record(1, relative(cum.delta_at(i), v[i], magnitude));
        }
        let cum = f.cumulative_nabla(anchor)?;
        for i in 1..n {
            let nu = ts.nu_at(i);
            let magnitude = (cum.at(i).abs() + cum.at(i - 1).abs()) / nu;
            tally.record(2, relative(cum.nabla_at(i), v[i], magnitude));
        }

        let mut idx = [
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            rng.gen_range(0..n),
        ];
        idx.sort_unstable();
        let [ia, ib, ic] = idx.map(|i| ts.point(i));
        let whole = f.delta_integral(ia, ic)?;
        let split = f.delta_integral(ia, ib)? + f.delta_integral(ib, ic)?;
        let absolute = f.map(f64::abs)?.delta_integral(ia, ic)?;
        tally.record(3, relative(whole, split, absolute));

        let w = g.values();
        let q = positive.values();
        for i in 0..ts.last_index() {
            let t = ts.point(i);
            let mu = ts.mu_at(i);
            let (fd, gd) = (f.delta_at(i), g.delta_at(i));
            let (fs, gs) = (v[i + 1], w[i + 1]);
            let (r1, r2) = f.product_rule_residual(&g, t)?;
            let product = (fs * gs).abs() / mu + (v[i] * w[i]).abs() / mu;
            tally.record(
                4,
                relative(r1, 0.0, product + (fd * w[i]).abs() + (fs * gd).abs()),
            );
            tally.record(
                5,
                relative(r2, 0.0, product + (v[i] * gd).abs() + (fd * gs).abs()),
            );

            let r = f.quotient_rule_residual(&positive, t)?;
            let pd = positive.delta_at(i);
            let magnitude = ((fs / q[i + 1]).abs() + (v[i] / q[i]).abs()) / mu
                + ((fd * q[i]).abs() + (v[i] * pd).abs()) / (q[i] * q[i + 1]);
            tally.record(6, relative(r, 0.0, magnitude));
        }
        Ok(())
    })?;
    Ok(IdentityReport {
        seed,
        scales: cases,
        checks: finish(&IDENTITY_NAMES, tally, IDENTITY_TOLERANCE),
    })
}

const SANDWICH_NAMES: [&str; 3] = [
    "power-sandwich-delta",
    "power-sandwich-nabla",
    "nabla-power-telescoped",
];

/// Power-rule sandwiches for nonnegative nondecreasing functions at every
/// point, with `p` cycling through 1.5, 2, 3 and 5.5, plus the telescoped
/// nabla identity for integer `p`. The sandwich checks report the largest
/// breach relative to the operand size; the identity reports relative error.
pub fn power_rule_suite(cases: usize, seed: u64) -> Result<Vec<IdentityCheck>, HarnessError> {
    if cases == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let tally = run_parallel(cases, seed, SANDWICH_NAMES.len(), |rng, tally| {
        let ts = random_scale(rng)?;
        let p = SANDWICH_EXPONENTS[rng.gen_range(0..SANDWICH_EXPONENTS.len())];
        let mut v = rng.gen_range(0.0..5.0);
        let mut values = Vec::with_capacity(ts.len());
        values.push(v);
        for i in 0..ts.last_index() {
            if rng.gen_bool(0.8) {
                v += ts.mu_at(i) * rng.gen_range(0.0..3.0);
            }
            values.push(v);
        }
        let g = grid(&ts, values)?;
        let breach = |lo: f64, hi: f64, scale: f64| ((lo - hi) / scale).max(0.0);
        for i in 0..ts.len() {
            let t = ts.point(i);
            if i < ts.last_index() {
                let b = g.power_bounds_delta(p, t)?;
                let scale = 1f64.max(b.lower.abs()).max(b.upper.abs()).max(b.magnitude);
                tally.record(
                    0,
                    breach(b.lower, b.exact, scale).max(breach(b.exact, b.upper, scale)),
                );
            }
            if i > 0 {
                let b = g.power_bounds_nabla(p, t)?;
                let scale = 1f64.max(b.lower.abs()).max(b.upper.abs()).max(b.magnitude);
                tally.record(
                    1,
                    breach(b.lower, b.exact, scale).max(breach(b.exact, b.upper, scale)),
                );
                if p.fract() == 0.0 {
                    let telescoped = g.nabla_power_telescoped(p as u32, t)?;
                    tally.record(2, relative(b.exact, telescoped, b.magnitude));
                }
            }
        }
        Ok(())
    })?;
    let mut checks = finish(&SANDWICH_NAMES[..2], tally.clone(), SANDWICH_TOLERANCE);
    checks.extend(
        finish(&SANDWICH_NAMES, tally, IDENTITY_TOLERANCE)
            .into_iter()
            .skip(2),
    );
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold() {
        let report = identity_suite(50, 1).unwrap();
        assert!(report.passed(), "{:#?}", report.checks);
        assert!(report.checks.iter().all(|c| c.cases > 0));
    }

    #[test]
    fn sandwiches_hold() {
        let checks = power_rule_suite(200, 2).unwrap();
        assert!(
            checks.iter().all(|c| c.passed && c.cases > 0),
            "{checks:#?}"
        );
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            identity_suite(20, 5).unwrap(),
            identity_suite(20, 5).unwrap()
        );
    }

    #[test]
    fn nan_fails() {
        let mut tally = Tally::new(1);
        tally.record(0, f64::NAN);
        assert!(!finish(&["x"], tally, 1.0)[0].passed);
    }
}
