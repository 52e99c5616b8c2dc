//! Grid functions on a finite time scale together with their delta/nabla
//! derivatives, Cauchy integrals and jump-operator compositions.
//!
//! Every point of a finite scale is scattered, so derivatives are exact
//! difference quotients and integrals are exact weighted sums. Integrals are
//! accumulated left to right in ascending point order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timescale::{ScaleError, TimeScale};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error("non-finite value {value} at point {point}")]
    NonFiniteValue { point: f64, value: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operation needs at least two points")]
    DegenerateScale,
    #[error("grid functions live on different scales")]
    ScaleMismatch,
    #[error("{0} lies outside the derivative domain")]
    OutsideDomain(f64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("division by zero at {0}")]
    DivisionByZero(f64),
}

/// `base^exp` for the nonnegative bases the inequalities work with.
///
/// `0^0` is 1. Negative bases and `0^negative` are rejected.
pub fn power(base: f64, exp: f64) -> Result<f64, CalculusError> {
    if exp == 0.0 {
        return Ok(1.0);
    }
    if base < 0.0 || base.is_nan() {
        return Err(CalculusError::HypothesisViolated(format!(
            "negative base {base} raised to {exp}"
        )));
    }
    if base == 0.0 && exp < 0.0 {
        return Err(CalculusError::HypothesisViolated(format!(
            "zero raised to negative exponent {exp}"
        )));
    }
    Ok(base.powf(exp))
}

/// Values of `f : T -> R`, one per point of the scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridFunction {
    scale: Arc<TimeScale>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGrid {
    scale: TimeScale,
    values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridFunction {
    type Error = CalculusError;

    fn try_from(raw: RawGrid) -> Result<Self, Self::Error> {
        GridFunction::new(Arc::new(raw.scale), raw.values)
    }
}

/// `f^Δ` on T^κ or `f^∇` on T_κ, stored with its restricted point list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeField {
    pub scale: TimeScale,
    pub values: Vec<f64>,
}

impl DerivativeField {
    pub fn value_at(&self, t: f64) -> Result<f64, CalculusError> {
        let i = self
            .scale
            .index_of(t)
            .map_err(|_| CalculusError::OutsideDomain(t))?;
        Ok(self.values[i])
    }
}

/// The three terms of a power-rule sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBounds {
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
    /// `(g(s)^p + g(t)^p) / gap`: the size of the operands behind `exact`,
    /// which bounds its rounding error.
    pub magnitude: f64,
}

impl PowerBounds {
    /// Smallest of `exact - lower` and `upper - exact`.
    pub fn slack(&self) -> f64 {
        (self.exact - self.lower).min(self.upper - self.exact)
    }
}

fn check_finite(scale: &TimeScale, values: &[f64]) -> Result<(), CalculusError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(CalculusError::NonFiniteValue {
            point: scale.point(i),
            value: values[i],
        }),
        None => Ok(()),
    }
}

impl GridFunction {
    pub fn new(scale: Arc<TimeScale>, values: Vec<f64>) -> Result<Self, CalculusError> {
        if values.len() != scale.len() {
            return Err(CalculusError::LengthMismatch {
                expected: scale.len(),
                got: values.len(),
            });
        }
        check_finite(&scale, &values)?;
        Ok(Self { scale, values })
    }

    pub fn tabulate(
        scale: Arc<TimeScale>,
        rule: impl Fn(f64) -> f64,
    ) -> Result<Self, CalculusError> {
        let values = scale.points().iter().map(|&x| rule(x)).collect();
        Self::new(scale, values)
    }

    pub fn constant(scale: Arc<TimeScale>, c: f64) -> Result<Self, CalculusError> {
        let n = scale.len();
        Self::new(scale, vec![c; n])
    }

    pub fn scale(&self) -> &TimeScale {
        &self.scale
    }

    pub fn shared_scale(&self) -> Arc<TimeScale> {
        Arc::clone(&self.scale)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn value(&self, t: f64) -> Result<f64, CalculusError> {
        Ok(self.values[self.scale.index_of(t)?])
    }

    /// Pointwise map on the same scale.
    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self, CalculusError> {
        let values = self.values.iter().map(|&v| op(v)).collect();
        Self::new(self.shared_scale(), values)
    }

    /// Pointwise combination with another function on the same scale.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        op: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, CalculusError> {
        self.same_scale(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| op(x, y))
            .collect();
        Self::new(self.shared_scale(), values)
    }

    fn same_scale(&self, other: &GridFunction) -> Result<(), CalculusError> {
        if Arc::ptr_eq(&self.scale, &other.scale) || self.scale == other.scale {
            Ok(())
        } else {
            Err(CalculusError::ScaleMismatch)
        }
    }

    /// `(f(σ(t_i)) - f(t_i)) / μ(t_i)` for an index of T^κ.
    pub fn delta_at(&self, i: usize) -> f64 {
        let s = self.scale.sigma_index(i);
        (self.values[s] - self.values[i]) / (self.scale.point(s) - self.scale.point(i))
    }

    /// `(f(t_i) - f(ρ(t_i))) / ν(t_i)` for an index of T_κ.
    pub fn nabla_at(&self, i: usize) -> f64 {
        let r = self.scale.rho_index(i);
        (self.values[i] - self.values[r]) / (self.scale.point(i) - self.scale.point(r))
    }

    pub fn delta_derivative(&self) -> Result<DerivativeField, CalculusError> {
        if self.scale.len() < 2 {
            return Err(CalculusError::DegenerateScale);
        }
        let values = (0..self.scale.last_index())
            .map(|i| self.delta_at(i))
            .collect();
        Ok(DerivativeField {
            scale: self.scale.kappa(),
            values,
        })
    }

    pub fn nabla_derivative(&self) -> Result<DerivativeField, CalculusError> {
        if self.scale.len() < 2 {
            return Err(CalculusError::DegenerateScale);
        }
        let values = (1..self.scale.len()).map(|i| self.nabla_at(i)).collect();
        Ok(DerivativeField {
            scale: self.scale.kappa_lower(),
            values,
        })
    }

    fn compose(&self, jump: impl Fn(usize) -> usize) -> Self {
        let values = (0..self.values.len())
            .map(|i| self.values[jump(i)])
            .collect();
        Self {
            scale: self.shared_scale(),
            values,
        }
    }

    /// `f^σ`, saturating at the maximum.
    pub fn sigma_compose(&self) -> Self {
        self.compose(|i| self.scale.sigma_index(i))
    }

    /// `f^ρ`, saturating at the minimum.
    pub fn rho_compose(&self) -> Self {
        self.compose(|i| self.scale.rho_index(i))
    }

    /// `f^{σ²} = f ∘ σ ∘ σ`.
    pub fn sigma2_compose(&self) -> Self {
        self.compose(|i| self.scale.sigma_index(self.scale.sigma_index(i)))
    }

    /// `∫_a^b f Δt = Σ_{t ∈ [a,b)} f(t) μ(t)`.
    pub fn delta_integral(&self, a: f64, b: f64) -> Result<f64, CalculusError> {
        let (ia, ib) = self.scale.interval_indices(a, b)?;
        Ok(self.delta_sum(ia, ib))
    }

    /// `∫_a^b f ∇t = Σ_{t ∈ (a,b]} f(t) ν(t)`.
    pub fn nabla_integral(&self, a: f64, b: f64) -> Result<f64, CalculusError> {
        let (ia, ib) = self.scale.interval_indices(a, b)?;
        Ok(self.nabla_sum(ia, ib))
    }

    /// Index-range delta integral; `ia <= ib` is assumed.
    pub fn delta_sum(&self, ia: usize, ib: usize) -> f64 {
        (ia..ib).fold(0.0, |acc, i| acc + self.values[i] * self.scale.mu_at(i))
    }

    /// Delta sum of `op(f)` over an index range.
    pub fn delta_sum_with(&self, ia: usize, ib: usize, op: impl Fn(f64) -> f64) -> f64 {
        (ia..ib).fold(0.0, |acc, i| acc + op(self.values[i]) * self.scale.mu_at(i))
    }

    /// Index-range nabla integral; `ia <= ib` is assumed.
    pub fn nabla_sum(&self, ia: usize, ib: usize) -> f64 {
        (ia + 1..=ib).fold(0.0, |acc, i| acc + self.values[i] * self.scale.nu_at(i))
    }

    /// `g(x) = ∫_a^x f Δu` at every point, oriented so that `g(x) = -∫_x^a f Δu`
    /// below `a`.
    pub fn cumulative_delta(&self, a: f64) -> Result<Self, CalculusError> {
        let ia = self.scale.index_of(a)?;
        let n = self.values.len();
        let mut values = vec![0.0; n];
        for i in ia + 1..n {
            values[i] = values[i - 1] + self.values[i - 1] * self.scale.mu_at(i - 1);
        }
        for i in (0..ia).rev() {
            values[i] = values[i + 1] - self.values[i] * self.scale.mu_at(i);
        }
        Self::new(self.shared_scale(), values)
    }

    /// `g(x) = ∫_a^x f ∇u` at every point, with the same orientation rule.
    pub fn cumulative_nabla(&self, a: f64) -> Result<Self, CalculusError> {
        let ia = self.scale.index_of(a)?;
        let n = self.values.len();
        let mut values = vec![0.0; n];
        for i in ia + 1..n {
            values[i] = values[i - 1] + self.values[i] * self.scale.nu_at(i);
        }
        for i in (0..ia).rev() {
            values[i] = values[i + 1] - self.values[i + 1] * self.scale.nu_at(i + 1);
        }
        Self::new(self.shared_scale(), values)
    }

    /// Whether values never decrease along the index range `[from, to]`.
    pub fn is_nondecreasing_on(&self, from: usize, to: usize) -> bool {
        self.values[from..=to].windows(2).all(|w| w[0] <= w[1])
    }

    fn require_power_hypothesis(&self, p: f64) -> Result<(), CalculusError> {
        if !(p > 1.0) {
            return Err(CalculusError::HypothesisViolated(format!(
                "power-rule exponent must exceed 1, got {p}"
            )));
        }
        if let Some(v) = self.values.iter().find(|&&v| v < 0.0) {
            return Err(CalculusError::HypothesisViolated(format!(
                "function takes negative value {v}"
            )));
        }
        if !self.is_nondecreasing_on(0, self.values.len() - 1) {
            return Err(CalculusError::HypothesisViolated(
                "function decreases somewhere on the scale".into(),
            ));
        }
        Ok(())
    }

    /// Delta power-rule sandwich at `t ∈ T^κ`:
    /// `p g^{p-1} g^Δ <= (g^p)^Δ <= p (g^σ)^{p-1} g^Δ`.
    pub fn power_bounds_delta(&self, p: f64, t: f64) -> Result<PowerBounds, CalculusError> {
        self.require_power_hypothesis(p)?;
        let i = self.scale.index_of(t)?;
        if i == self.scale.last_index() {
            return Err(CalculusError::OutsideDomain(t));
        }
        let g = self.values[i];
        let g_sigma = self.values[self.scale.sigma_index(i)];
        let slope = self.delta_at(i);
        Ok(PowerBounds {
            lower: p * power(g, p - 1.0)? * slope,
            exact: (power(g_sigma, p)? - power(g, p)?) / self.scale.mu_at(i),
            upper: p * power(g_sigma, p - 1.0)? * slope,
            magnitude: (power(g_sigma, p)? + power(g, p)?) / self.scale.mu_at(i),
        })
    }

    /// Nabla power-rule sandwich at `t ∈ T_κ`:
    /// `p (g^ρ)^{p-1} g^∇ <= (g^p)^∇ <= p g^{p-1} g^∇`.
    pub fn power_bounds_nabla(&self, p: f64, t: f64) -> Result<PowerBounds, CalculusError> {
        self.require_power_hypothesis(p)?;
        let i = self.scale.index_of(t)?;
        if i == 0 {
            return Err(CalculusError::OutsideDomain(t));
        }
        let g = self.values[i];
        let g_rho = self.values[self.scale.rho_index(i)];
        let slope = self.nabla_at(i);
        Ok(PowerBounds {
            lower: p * power(g_rho, p - 1.0)? * slope,
            exact: (power(g, p)? - power(g_rho, p)?) / self.scale.nu_at(i),
            upper: p * power(g, p - 1.0)? * slope,
            magnitude: (power(g, p)? + power(g_rho, p)?) / self.scale.nu_at(i),
        })
    }

    /// Right-hand side of the integer-power nabla identity
    /// `(g^p)^∇ = (Σ_{k<p} g^{p-1-k} (g^ρ)^k) g^∇` at `t ∈ T_κ`.
    pub fn nabla_power_telescoped(&self, p: u32, t: f64) -> Result<f64, CalculusError> {
        let i = self.scale.index_of(t)?;
        if i == 0 || p == 0 {
            return Err(CalculusError::OutsideDomain(t));
        }
        let g = self.values[i];
        let g_rho = self.values[self.scale.rho_index(i)];
        let sum: f64 = (0..p)
            .map(|k| g.powi((p - 1 - k) as i32) * g_rho.powi(k as i32))
            .sum();
        Ok(sum * self.nabla_at(i))
    }

    /// Residuals of both delta product-rule forms at `t ∈ T^κ`:
    /// `(fg)^Δ - (f^Δ g + f^σ g^Δ)` and `(fg)^Δ - (f g^Δ + f^Δ g^σ)`.
    pub fn product_rule_residual(
        &self,
        other: &GridFunction,
        t: f64,
    ) -> Result<(f64, f64), CalculusError> {
        self.same_scale(other)?;
        let i = self.kappa_index(t)?;
        let s = self.scale.sigma_index(i);
        let (f, fs, g, gs) = (
            self.values[i],
            self.values[s],
            other.values[i],
            other.values[s],
        );
        let fd = self.delta_at(i);
        let gd = other.delta_at(i);
        let product = (fs * gs - f * g) / self.scale.mu_at(i);
        Ok((product - (fd * g + fs * gd), product - (f * gd + fd * gs)))
    }

    /// Residual `(f/g)^Δ - (f^Δ g - f g^Δ) / (g g^σ)` at `t ∈ T^κ`.
    pub fn quotient_rule_residual(
        &self,
        other: &GridFunction,
        t: f64,
    ) -> Result<f64, CalculusError> {
        self.same_scale(other)?;
        let i = self.kappa_index(t)?;
        let s = self.scale.sigma_index(i);
        let (f, fs, g, gs) = (
            self.values[i],
            self.values[s],
            other.values[i],
            other.values[s],
        );
        let denom = g * gs;
        if denom == 0.0 {
            return Err(CalculusError::DivisionByZero(t));
        }
        let quotient = (fs / gs - f / g) / self.scale.mu_at(i);
        Ok(quotient - (self.delta_at(i) * g - f * other.delta_at(i)) / denom)
    }

    fn kappa_index(&self, t: f64) -> Result<usize, CalculusError> {
        let i = self.scale.index_of(t)?;
        if i == self.scale.last_index() {
            Err(CalculusError::OutsideDomain(t))
        } else {
            Ok(i)
        }
    }
}

/// `σ^Δ(t) = (σ²(t) - σ(t)) / μ(t)` on T^κ.
pub fn sigma_delta(ts: &TimeScale) -> Result<DerivativeField, CalculusError> {
    if ts.len() < 2 {
        return Err(CalculusError::DegenerateScale);
    }
    let values = (0..ts.last_index())
        .map(|i| sigma_delta_at(ts, i))
        .collect();
    Ok(DerivativeField {
        scale: ts.kappa(),
        values,
    })
}

/// `σ^Δ` at an index of T^κ.
pub fn sigma_delta_at(ts: &TimeScale, i: usize) -> f64 {
    let s = ts.sigma_index(i);
    (ts.sigma_at(s) - ts.point(s)) / ts.mu_at(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(points: &[f64], values: &[f64]) -> GridFunction {
        let ts = Arc::new(TimeScale::from_points(points.to_vec()).unwrap());
        GridFunction::new(ts, values.to_vec()).unwrap()
    }

    fn rel_close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
    }

    #[test]
    fn tabulate_cases() {
        let ts = Arc::new(TimeScale::from_points(vec![0.0, 1.0, 2.0]).unwrap());
        let sq = GridFunction::tabulate(ts.clone(), |x| x * x).unwrap();
        assert_eq!(sq.values(), &[0.0, 1.0, 4.0]);
        let ones = GridFunction::tabulate(
            Arc::new(TimeScale::from_points(vec![1.0, 2.0, 4.0]).unwrap()),
            |_| 1.0,
        )
        .unwrap();
        assert_eq!(ones.values(), &[1.0, 1.0, 1.0]);
        assert!(matches!(
            GridFunction::tabulate(ts.clone(), |_| f64::NAN),
            Err(CalculusError::NonFiniteValue { .. })
        ));
        assert!(matches!(
            GridFunction::new(ts, vec![1.0]),
            Err(CalculusError::LengthMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn power_conventions() {
        assert_eq!(power(0.0, 0.0), Ok(1.0));
        assert_eq!(power(0.0, 2.5), Ok(0.0));
        assert_eq!(power(4.0, 0.5), Ok(2.0));
        assert!(power(0.0, -1.0).is_err());
        assert!(power(-1.0, 2.0).is_err());
    }

    #[test]
    fn derivatives_on_integer_slice() {
        let ts = Arc::new(TimeScale::h_lattice(0.0, 5.0, 1.0).unwrap());
        let f = GridFunction::tabulate(ts.clone(), |x| x * x).unwrap();
        assert_eq!(f.delta_derivative().unwrap().value_at(2.0), Ok(5.0));
        assert_eq!(f.nabla_derivative().unwrap().value_at(2.0), Ok(3.0));
        let c = GridFunction::constant(ts, 7.0).unwrap();
        assert!(c
            .nabla_derivative()
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));

        let single = grid(&[5.0], &[1.0]);
        assert_eq!(
            single.delta_derivative(),
            Err(CalculusError::DegenerateScale)
        );
        assert_eq!(
            single.nabla_derivative(),
            Err(CalculusError::DegenerateScale)
        );
    }

    #[test]
    fn derivative_domains() {
        let f = grid(&[0.0, 1.0, 3.0], &[0.0, 1.0, 9.0]);
        let d = f.delta_derivative().unwrap();
        assert_eq!(d.scale.points(), &[0.0, 1.0]);
        assert_eq!(d.value_at(3.0), Err(CalculusError::OutsideDomain(3.0)));
        let n = f.nabla_derivative().unwrap();
        assert_eq!(n.scale.points(), &[1.0, 3.0]);
        assert_eq!(n.values, vec![1.0, 4.0]);
    }

    #[test]
    fn identity_on_q_power_has_unit_derivative() {
        let ts = Arc::new(TimeScale::q_power(1.0, 2.0, 0, 3).unwrap());
        let id = GridFunction::tabulate(ts, |x| x).unwrap();
        assert!(id
            .delta_derivative()
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 1.0));
    }

    #[test]
    fn lattice_formulas() {
        let h = 0.25;
        let ts = Arc::new(TimeScale::h_lattice(0.0, 2.0, h).unwrap());
        let f = GridFunction::tabulate(ts.clone(), |x| x.sin()).unwrap();
        for (i, &t) in ts.kappa().points().iter().enumerate() {
            let expected = ((t + h).sin() - t.sin()) / h;
            assert!(rel_close(f.delta_at(i), expected, 1e-12));
        }
        let q = 1.5;
        let ts = Arc::new(TimeScale::q_power(1.0, q, 0, 6).unwrap());
        let f = GridFunction::tabulate(ts.clone(), |x| x.ln() + x * x).unwrap();
        let rule = |x: f64| x.ln() + x * x;
        for (i, &t) in ts.kappa().points().iter().enumerate() {
            let expected = (rule(q * t) - rule(t)) / ((q - 1.0) * t);
            assert!(rel_close(f.delta_at(i), expected, 1e-12));
        }
    }

    #[test]
    fn compositions_saturate() {
        let f = grid(&[0.0, 1.0, 2.0], &[3.0, 5.0, 9.0]);
        assert_eq!(f.sigma_compose().values(), &[5.0, 9.0, 9.0]);
        assert_eq!(f.rho_compose().values(), &[3.0, 3.0, 5.0]);
        assert_eq!(f.sigma2_compose().values(), &[9.0, 9.0, 9.0]);
    }

    #[test]
    fn sigma_delta_cases() {
        let lattice = TimeScale::h_lattice(0.0, 2.0, 0.5).unwrap();
        let sd = sigma_delta(&lattice).unwrap();
        // The last T^κ point sees σ saturate, so only interior points are 1.
        assert!(sd.values[..sd.values.len() - 1].iter().all(|&v| v == 1.0));
        let q = TimeScale::q_power(1.0, 2.0, 0, 3).unwrap();
        let sd = sigma_delta(&q).unwrap();
        assert_eq!(&sd.values[..2], &[2.0, 2.0]);
        let ragged = TimeScale::from_points(vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(sigma_delta(&ragged).unwrap().value_at(0.0), Ok(2.0));
        assert_eq!(
            sigma_delta(&TimeScale::from_points(vec![1.0]).unwrap()),
            Err(CalculusError::DegenerateScale)
        );
    }

    #[test]
    fn integrals() {
        let ones = grid(&[0.0, 1.0, 2.0, 3.0], &[1.0; 4]);
        assert_eq!(ones.delta_integral(0.0, 3.0), Ok(3.0));
        assert_eq!(ones.nabla_integral(0.0, 3.0), Ok(3.0));
        assert_eq!(ones.delta_integral(2.0, 2.0), Ok(0.0));
        assert_eq!(ones.nabla_integral(2.0, 2.0), Ok(0.0));
        let ragged = grid(&[0.0, 1.0, 3.0], &[1.0, 1.0, 1.0]);
        assert_eq!(ragged.nabla_integral(0.0, 3.0), Ok(3.0));
        assert!(matches!(
            ragged.delta_integral(3.0, 0.0),
            Err(CalculusError::Scale(ScaleError::BadInterval(..)))
        ));
        assert!(matches!(
            ragged.delta_integral(0.5, 3.0),
            Err(CalculusError::Scale(ScaleError::NotAPoint(_)))
        ));
        // Single-step integral equals f(t) μ(t).
        let f = grid(&[0.0, 0.5, 3.0], &[2.0, -1.0, 4.0]);
        assert_eq!(f.delta_integral(0.5, 3.0), Ok(-2.5));
    }

    #[test]
    fn cumulative_integrals() {
        let f = grid(&[0.0, 1.0, 3.0, 4.0], &[2.0, 3.0, 5.0, 7.0]);
        let g = f.cumulative_delta(1.0).unwrap();
        assert_eq!(g.values(), &[-2.0, 0.0, 6.0, 11.0]);
        // g^σ(a) = f(a) μ(a)
        assert_eq!(g.sigma_compose().value(1.0), Ok(3.0 * 2.0));
        let d = g.delta_derivative().unwrap();
        assert_eq!(&d.values[..], &f.values()[..3]);

        let gn = f.cumulative_nabla(1.0).unwrap();
        assert_eq!(gn.values(), &[-3.0, 0.0, 10.0, 17.0]);
        let n = gn.nabla_derivative().unwrap();
        assert_eq!(&n.values[..], &f.values()[1..]);
    }

    #[test]
    fn power_bounds_examples() {
        let c = grid(&[0.0, 1.0, 2.0], &[4.0; 3]);
        let terms = |b: PowerBounds| (b.lower, b.exact, b.upper);
        assert_eq!(
            terms(c.power_bounds_delta(2.5, 0.0).unwrap()),
            (0.0, 0.0, 0.0)
        );
        assert_eq!(
            terms(c.power_bounds_nabla(2.5, 2.0).unwrap()),
            (0.0, 0.0, 0.0)
        );

        let id = grid(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]);
        let delta = id.power_bounds_delta(2.0, 0.0).unwrap();
        assert_eq!((delta.lower, delta.exact, delta.upper), (0.0, 1.0, 2.0));
        let nabla = id.power_bounds_nabla(2.0, 1.0).unwrap();
        assert_eq!((nabla.lower, nabla.exact, nabla.upper), (0.0, 1.0, 2.0));

        let dec = grid(&[0.0, 1.0, 2.0], &[2.0, 1.0, 0.0]);
        assert!(matches!(
            dec.power_bounds_delta(2.0, 0.0),
            Err(CalculusError::HypothesisViolated(_))
        ));
        assert!(matches!(
            dec.power_bounds_nabla(2.0, 1.0),
            Err(CalculusError::HypothesisViolated(_))
        ));
        assert!(matches!(
            id.power_bounds_delta(2.0, 2.0),
            Err(CalculusError::OutsideDomain(_))
        ));
    }

    #[test]
    fn telescoped_nabla_power() {
        let g = grid(&[0.0, 0.5, 2.0], &[1.0, 1.5, 4.0]);
        for p in 2..6u32 {
            let bounds = g.power_bounds_nabla(p as f64, 2.0).unwrap();
            let tele = g.nabla_power_telescoped(p, 2.0).unwrap();
            assert!(rel_close(bounds.exact, tele, 1e-12), "p={p}");
        }
    }

    #[test]
    fn product_and_quotient_rules() {
        let f = grid(&[0.0, 1.0, 2.0], &[1.0, 3.0, -2.0]);
        let g = grid(&[0.0, 1.0, 2.0], &[2.0, 5.0, 7.0]);
        for t in [0.0, 1.0] {
            let (r1, r2) = f.product_rule_residual(&g, t).unwrap();
            assert!(r1.abs() <= 1e-12 && r2.abs() <= 1e-12);
            assert!(f.quotient_rule_residual(&g, t).unwrap().abs() <= 1e-12);
        }
        let one = grid(&[0.0, 1.0, 2.0], &[1.0; 3]);
        assert_eq!(one.product_rule_residual(&g, 0.0), Ok((0.0, 0.0)));
        let vanishing = grid(&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0]);
        assert_eq!(
            f.quotient_rule_residual(&vanishing, 0.0),
            Err(CalculusError::DivisionByZero(0.0))
        );
        let elsewhere = grid(&[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(
            f.product_rule_residual(&elsewhere, 0.0),
            Err(CalculusError::ScaleMismatch)
        );
    }

    #[test]
    fn grid_json_shape() {
        let f = grid(&[0.0, 1.0], &[2.0, 3.0]);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"scale":{"tag":"explicit","params":{},"points":[0.0,1.0]},"values":[2.0,3.0]}"#
        );
        let back: GridFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        let short = r#"{"scale":{"tag":"explicit","params":{},"points":[0.0,1.0]},"values":[2.0]}"#;
        assert!(serde_json::from_str::<GridFunction>(short).is_err());
    }
}
