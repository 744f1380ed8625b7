//! Nonsequential integration rules.
//!
//! Every rule is a pair (distribution of evaluation points, combination map):
//! [`Nonsequential::sample_points`] draws the points before any function value
//! is seen, and [`Nonsequential::combine`] maps points and values to an
//! estimate of `∫₀¹ f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_model::MonotoneFunction;
use crate::rng::{RngStream, SimRng};

/// Stratum boundaries `0 = x₀ < … < x_K = 1` and per-stratum sample counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrataSpec {
    boundaries: Vec<f64>,
    allocation: Vec<usize>,
}

impl StrataSpec {
    pub fn new(boundaries: Vec<f64>, allocation: Vec<usize>) -> Result<Self> {
        let s = Self { boundaries, allocation };
        s.validate()?;
        Ok(s)
    }

    /// `K` equal strata with one point each.
    pub fn equal(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidStrata("need at least one stratum".into()));
        }
        let boundaries = (0..=k).map(|i| i as f64 / k as f64).collect();
        Self::new(boundaries, vec![1; k])
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.boundaries;
        if b.len() < 2 {
            return Err(Error::InvalidStrata("need at least two boundaries".into()));
        }
        if b[0] != 0.0 || b[b.len() - 1] != 1.0 {
            return Err(Error::InvalidStrata("boundaries must start at 0 and end at 1".into()));
        }
        if b.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidStrata("boundaries must be strictly increasing".into()));
        }
        if self.allocation.len() != b.len() - 1 {
            return Err(Error::InvalidStrata(format!(
                "{} strata but {} allocation entries",
                b.len() - 1,
                self.allocation.len()
            )));
        }
        if let Some(k) = self.allocation.iter().position(|&n| n == 0) {
            return Err(Error::InvalidStrata(format!(
                "stratum {} has no samples; every stratum needs n_k >= 1",
                k + 1
            )));
        }
        Ok(())
    }

    pub fn strata(&self) -> usize {
        self.allocation.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn allocation(&self) -> &[usize] {
        &self.allocation
    }

    /// `w_k = x_k − x_{k−1}`.
    pub fn weights(&self) -> Vec<f64> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Total sample size `Σ n_k`.
    pub fn budget(&self) -> usize {
        self.allocation.iter().sum()
    }

    /// Stratum `k` (0-based) as `(left, right)`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.boundaries[k], self.boundaries[k + 1])
    }
}

/// Which rule to run and with what budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorSpec {
    SimpleMc { n: usize },
    ControlVariate { n: usize },
    Stratified(StrataSpec),
    Trapezoid { n: usize },
}

impl EstimatorSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EstimatorSpec::SimpleMc { n }
            | EstimatorSpec::ControlVariate { n }
            | EstimatorSpec::Trapezoid { n } => {
                if *n == 0 {
                    return Err(Error::InvalidConfig("sample size must be at least 1".into()));
                }
                Ok(())
            }
            EstimatorSpec::Stratified(s) => s.validate(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::SimpleMc { .. } => "simple_mc",
            EstimatorSpec::ControlVariate { .. } => "control_variate",
            EstimatorSpec::Stratified(_) => "stratified",
            EstimatorSpec::Trapezoid { .. } => "trapezoid",
        }
    }

    /// Runs the rule on `f` with draws from `stream`.
    pub fn estimate(&self, f: &MonotoneFunction, stream: RngStream) -> Result<f64> {
        self.validate()?;
        Ok(Nonsequential::estimate(self, f, &mut stream.open()))
    }
}

/// A nonsequential method: points first, then a fixed combination map.
pub trait Nonsequential {
    /// Number of function evaluations.
    fn budget(&self) -> usize;

    fn is_randomized(&self) -> bool;

    fn sample_points(&self, rng: &mut SimRng) -> Vec<f64>;

    fn combine(&self, points: &[f64], values: &[f64]) -> f64;

    fn estimate(&self, f: &MonotoneFunction, rng: &mut SimRng) -> f64 {
        let points = self.sample_points(rng);
        let values: Vec<f64> = points.iter().map(|&x| f.value(x)).collect();
        self.combine(&points, &values)
    }
}

impl Nonsequential for EstimatorSpec {
    fn budget(&self) -> usize {
        match self {
            EstimatorSpec::SimpleMc { n }
            | EstimatorSpec::ControlVariate { n }
            | EstimatorSpec::Trapezoid { n } => *n,
            EstimatorSpec::Stratified(s) => s.budget(),
        }
    }

    fn is_randomized(&self) -> bool {
        !matches!(self, EstimatorSpec::Trapezoid { .. })
    }

    fn sample_points(&self, rng: &mut SimRng) -> Vec<f64> {
        match self {
            EstimatorSpec::SimpleMc { n } | EstimatorSpec::ControlVariate { n } => {
                (0..*n).map(|_| rng.uniform()).collect()
            }
            EstimatorSpec::Stratified(s) => {
                let mut points = Vec::with_capacity(s.budget());
                for (k, &nk) in s.allocation.iter().enumerate() {
                    let (lo, hi) = s.interval(k);
                    let w = hi - lo;
                    points.extend((0..nk).map(|_| lo + w * rng.uniform()));
                }
                points
            }
            EstimatorSpec::Trapezoid { n } => {
                let h = (*n + 1) as f64;
                (1..=*n).map(|i| i as f64 / h).collect()
            }
        }
    }

    fn combine(&self, points: &[f64], values: &[f64]) -> f64 {
        match self {
            EstimatorSpec::SimpleMc { n } => values.iter().sum::<f64>() / *n as f64,
            EstimatorSpec::ControlVariate { n } => {
                let s: f64 = values.iter().zip(points).map(|(v, x)| v - x).sum();
                s / *n as f64 + 0.5
            }
            EstimatorSpec::Stratified(s) => {
                let mut total = 0.0;
                let mut offset = 0;
                for (k, &nk) in s.allocation.iter().enumerate() {
                    let (lo, hi) = s.interval(k);
                    let sum: f64 = values[offset..offset + nk].iter().sum();
                    total += (hi - lo) * (sum / nk as f64);
                    offset += nk;
                }
                total
            }
            // f(0) = 0 and f(1) = 1 assumed at the endpoints
            EstimatorSpec::Trapezoid { n } => {
                (values.iter().sum::<f64>() + 0.5) / (*n + 1) as f64
            }
        }
    }
}

/// Plain Monte Carlo: mean of `f` at `n` i.i.d. uniform points.
pub fn simple_mc(f: &MonotoneFunction, n: usize, stream: RngStream) -> Result<f64> {
    EstimatorSpec::SimpleMc { n }.estimate(f, stream)
}

/// Monte Carlo with control variate `X`: `(1/n) Σ (f(X_i) − X_i) + 1/2`.
/// Not clamped; the estimate may leave `[0, 1]`.
pub fn control_variate(f: &MonotoneFunction, n: usize, stream: RngStream) -> Result<f64> {
    EstimatorSpec::ControlVariate { n }.estimate(f, stream)
}

/// Stratified sampling `Σ w_k (1/n_k) Σ_i f(X_{k,i})` with `X_{k,i}` uniform on stratum `k`.
pub fn stratified(f: &MonotoneFunction, strata: &StrataSpec, stream: RngStream) -> Result<f64> {
    strata.validate()?;
    let spec = EstimatorSpec::Stratified(strata.clone());
    Ok(Nonsequential::estimate(&spec, f, &mut stream.open()))
}

/// Trapezoidal rule on `i/(n+1)`, `i = 1..n`, with endpoint values 0 and 1.
pub fn trapezoid(f: &MonotoneFunction, n: usize) -> Result<f64> {
    EstimatorSpec::Trapezoid { n }.estimate(f, RngStream::new(0, 0))
}
