//! Finite time scales: jump operators, graininess, point classification and
//! the κ-restrictions used as derivative domains.
//!
//! Every query addresses points by their exact stored coordinate. Callers that
//! already hold an index can use the `*_at` variants, which skip the lookup.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lattices longer than this are rejected as a bad step.
const MAX_LATTICE_STEPS: f64 = 1.0e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleError {
    #[error("a time scale needs at least one point")]
    EmptyScale,
    #[error("duplicate point {0}")]
    DuplicatePoint(f64),
    #[error("non-finite coordinate {0}")]
    NonFinitePoint(f64),
    #[error("bad interval [{0}, {1}]")]
    BadInterval(f64, f64),
    #[error("bad lattice step {0}")]
    BadStep(f64),
    #[error("q-power ratio must exceed 1, got {0}")]
    BadRatio(f64),
    #[error("q-power base must be positive, got {0}")]
    BadBase(f64),
    #[error("exponent range {0}..={1} is empty")]
    BadExponentRange(i32, i32),
    #[error("{0} is not a point of the time scale")]
    NotAPoint(f64),
}

/// Where a scale came from. Purely descriptive: the operators treat every tag
/// identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "params", rename_all = "kebab-case")]
pub enum ScaleTag {
    Explicit {},
    HLattice { h: f64 },
    QPower { q: f64 },
    SampledInterval { n: usize },
}

/// A finite, strictly increasing set of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScale")]
pub struct TimeScale {
    #[serde(flatten)]
    tag: ScaleTag,
    points: Vec<f64>,
}

#[derive(Deserialize)]
struct RawScale {
    #[serde(flatten)]
    tag: ScaleTag,
    points: Vec<f64>,
}

impl TryFrom<RawScale> for TimeScale {
    type Error = ScaleError;

    fn try_from(raw: RawScale) -> Result<Self, Self::Error> {
        let mut ts = TimeScale::from_points(raw.points)?;
        ts.tag = raw.tag;
        Ok(ts)
    }
}

/// Classification flags of a single point. Several may be set at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PointClass {
    pub right_scattered: bool,
    pub right_dense: bool,
    pub left_scattered: bool,
    pub left_dense: bool,
    pub isolated: bool,
    pub max_point: bool,
    pub min_point: bool,
}

impl TimeScale {
    /// Builds an explicit scale from arbitrary-order points.
    pub fn from_points(mut points: Vec<f64>) -> Result<Self, ScaleError> {
        if points.is_empty() {
            return Err(ScaleError::EmptyScale);
        }
        if let Some(&bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(ScaleError::NonFinitePoint(bad));
        }
        points.sort_by(f64::total_cmp);
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(ScaleError::DuplicatePoint(w[0]));
        }
        Ok(Self {
            tag: ScaleTag::Explicit {},
            points,
        })
    }

    /// Arithmetic progression `a, a+h, ...` up to the last point not exceeding `b`.
    ///
    /// When `(b - a) / h` is an integer up to rounding the final point is pinned
    /// to `b` exactly, so dyadic and decimal steps both land on the endpoint.
    pub fn h_lattice(a: f64, b: f64, h: f64) -> Result<Self, ScaleError> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(ScaleError::BadInterval(a, b));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(ScaleError::BadStep(h));
        }
        let ratio = (b - a) / h;
        if !(ratio <= MAX_LATTICE_STEPS) {
            return Err(ScaleError::BadStep(h));
        }
        let nearest = ratio.round();
        let lands_on_b = (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0);
        let steps = if lands_on_b { nearest } else { ratio.floor() } as usize;
        let mut points: Vec<f64> = (0..=steps).map(|k| a + k as f64 * h).collect();
        if lands_on_b {
            points[steps] = b;
        } else if points[steps] > b {
            points.pop();
        }
        Ok(Self {
            tag: ScaleTag::HLattice { h },
            points,
        })
    }

    /// Truncated geometric scale `{base * q^k : k_min <= k <= k_max}`.
    pub fn q_power(base: f64, q: f64, k_min: i32, k_max: i32) -> Result<Self, ScaleError> {
        if !(base.is_finite() && base > 0.0) {
            return Err(ScaleError::BadBase(base));
        }
        if !(q.is_finite() && q > 1.0) {
            return Err(ScaleError::BadRatio(q));
        }
        if k_min > k_max {
            return Err(ScaleError::BadExponentRange(k_min, k_max));
        }
        let points: Vec<f64> = (k_min..=k_max).map(|k| base * q.powi(k)).collect();
        if let Some(&bad) = points.iter().find(|p| !p.is_finite() || **p == 0.0) {
            return Err(ScaleError::NonFinitePoint(bad));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(ScaleError::DuplicatePoint(w[1]));
        }
        Ok(Self {
            tag: ScaleTag::QPower { q },
            points,
        })
    }

    /// `n` equally spaced samples of `[a, b]`, endpoints included. Meant as a
    /// stand-in for a dense interval; the points are still scattered.
    pub fn sampled_interval(a: f64, b: f64, n: usize) -> Result<Self, ScaleError> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(ScaleError::BadInterval(a, b));
        }
        if n < 2 {
            return Err(ScaleError::BadStep(n as f64));
        }
        let step = (b - a) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|k| a + k as f64 * step).collect();
        points[n - 1] = b;
        let mut ts = Self::from_points(points)?;
        ts.tag = ScaleTag::SampledInterval { n };
        Ok(ts)
    }

    pub fn tag(&self) -> ScaleTag {
        self.tag
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for the `len` convention.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn last_index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    /// Index of `t`, which must match a stored coordinate exactly.
    pub fn index_of(&self, t: f64) -> Result<usize, ScaleError> {
        let i = self.points.partition_point(|&p| p < t);
        if i < self.points.len() && self.points[i] == t {
            Ok(i)
        } else {
            Err(ScaleError::NotAPoint(t))
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.index_of(t).is_ok()
    }

    pub fn sigma_index(&self, i: usize) -> usize {
        (i + 1).min(self.last_index())
    }

    pub fn rho_index(&self, i: usize) -> usize {
        i.saturating_sub(1)
    }

    pub fn sigma_at(&self, i: usize) -> f64 {
        self.points[self.sigma_index(i)]
    }

    pub fn rho_at(&self, i: usize) -> f64 {
        self.points[self.rho_index(i)]
    }

    pub fn mu_at(&self, i: usize) -> f64 {
        self.sigma_at(i) - self.points[i]
    }

    pub fn nu_at(&self, i: usize) -> f64 {
        self.points[i] - self.rho_at(i)
    }

    /// Forward jump. The maximum maps to itself.
    pub fn sigma(&self, t: f64) -> Result<f64, ScaleError> {
        self.index_of(t).map(|i| self.sigma_at(i))
    }

    /// Backward jump. The minimum maps to itself.
    pub fn rho(&self, t: f64) -> Result<f64, ScaleError> {
        self.index_of(t).map(|i| self.rho_at(i))
    }

    pub fn mu(&self, t: f64) -> Result<f64, ScaleError> {
        self.index_of(t).map(|i| self.mu_at(i))
    }

    pub fn nu(&self, t: f64) -> Result<f64, ScaleError> {
        self.index_of(t).map(|i| self.nu_at(i))
    }

    pub fn classify(&self, t: f64) -> Result<PointClass, ScaleError> {
        let i = self.index_of(t)?;
        let sigma = self.sigma_at(i);
        let rho = self.rho_at(i);
        let min_point = i == 0;
        let right_scattered = sigma > t;
        // Left-sidedness is only defined above inf T.
        let left_scattered = !min_point && rho < t;
        Ok(PointClass {
            right_scattered,
            right_dense: sigma == t,
            left_scattered,
            left_dense: !min_point && rho == t,
            isolated: right_scattered && left_scattered,
            max_point: i == self.last_index(),
            min_point,
        })
    }

    /// T^κ: drops a left-scattered maximum.
    pub fn kappa(&self) -> TimeScale {
        let mut out = self.clone();
        if out.points.len() > 1 {
            out.points.pop();
        }
        out
    }

    /// T_κ: drops a right-scattered minimum (the nabla domain).
    pub fn kappa_lower(&self) -> TimeScale {
        let mut out = self.clone();
        if out.points.len() > 1 {
            out.points.remove(0);
        }
        out
    }

    /// `[a, b]_T` as a sub-scale.
    pub fn restrict(&self, a: f64, b: f64) -> Result<TimeScale, ScaleError> {
        let (ia, ib) = self.interval_indices(a, b)?;
        Ok(TimeScale {
            tag: self.tag,
            points: self.points[ia..=ib].to_vec(),
        })
    }

    /// Indices of both endpoints of `[a, b]_T`.
    pub fn interval_indices(&self, a: f64, b: f64) -> Result<(usize, usize), ScaleError> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        if ia > ib {
            return Err(ScaleError::BadInterval(a, b));
        }
        Ok((ia, ib))
    }
}
