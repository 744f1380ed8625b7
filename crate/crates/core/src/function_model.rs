//! Bounded non-decreasing functions on `[0, 1]`.
//!
//! A [`MonotoneFunction`] is one of three representations:
//!
//! * a unit step `1_[x0, 1]`, closed at the jump;
//! * a staircase on `m` equal cells `((k-1)/m, k/m]`, with `f(0) = α₁`;
//! * an analytic preset (smooth test functions for empirical runs).
//!
//! Unit steps and staircases have exact integrals and moments; presets go
//! through adaptive quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, DEFAULT_TOL};

/// Smooth monotone test functions mapping `[0, 1]` onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum Preset {
    Identity,
    Square,
    Sqrt,
    /// Logistic curve rescaled so that `f(0) = 0` and `f(1) = 1`.
    Logistic {
        #[serde(default = "default_steepness")]
        steepness: f64,
        #[serde(default = "default_center")]
        center: f64,
    },
}

fn default_steepness() -> f64 {
    10.0
}

fn default_center() -> f64 {
    0.5
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl Preset {
    /// Logistic preset with the default parameters.
    pub fn logistic() -> Self {
        Preset::Logistic {
            steepness: default_steepness(),
            center: default_center(),
        }
    }

    fn value(&self, x: f64) -> f64 {
        match *self {
            Preset::Identity => x,
            Preset::Square => x * x,
            Preset::Sqrt => x.sqrt(),
            Preset::Logistic { steepness, center } => {
                let lo = sigmoid(-steepness * center);
                let hi = sigmoid(steepness * (1.0 - center));
                ((sigmoid(steepness * (x - center)) - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
        }
    }
}

/// An element of the class of non-decreasing functions `[0, 1] → [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneFunction {
    /// `f = 1` on `[x0, 1]`, `0` on `[0, x0)`.
    UnitStep { x0: f64 },
    /// `f = α_k` on `((k-1)/m, k/m]`, `m = alphas.len()`, `f(0) = α₁`.
    Staircase { alphas: Vec<f64> },
    Preset(Preset),
}

/// Number of grid points used when checking presets for range and monotonicity.
const PRESET_CHECK_GRID: usize = 4096;

impl MonotoneFunction {
    pub fn unit_step(x0: f64) -> Result<Self> {
        let f = MonotoneFunction::UnitStep { x0 };
        f.validate()?;
        Ok(f)
    }

    pub fn staircase(alphas: Vec<f64>) -> Result<Self> {
        let f = MonotoneFunction::Staircase { alphas };
        f.validate()?;
        Ok(f)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::staircase(vec![value])
    }

    pub fn preset(preset: Preset) -> Result<Self> {
        let f = MonotoneFunction::Preset(preset);
        f.validate()?;
        Ok(f)
    }

    /// Checks range and monotonicity. Presets are checked on a dense grid.
    pub fn validate(&self) -> Result<()> {
        match self {
            MonotoneFunction::UnitStep { x0 } => {
                if !(0.0..=1.0).contains(x0) {
                    return Err(Error::InvalidFunction(format!(
                        "unit step jump {x0} outside [0, 1]"
                    )));
                }
            }
            MonotoneFunction::Staircase { alphas } => {
                if alphas.is_empty() {
                    return Err(Error::InvalidFunction(
                        "staircase needs at least one piece".into(),
                    ));
                }
                if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                    return Err(Error::InvalidFunction(format!(
                        "staircase level {a} outside [0, 1]"
                    )));
                }
                if let Some(k) = alphas.windows(2).position(|w| w[0] > w[1]) {
                    return Err(Error::InvalidFunction(format!(
                        "staircase decreases between pieces {} and {}",
                        k + 1,
                        k + 2
                    )));
                }
            }
            MonotoneFunction::Preset(p) => {
                if let Preset::Logistic { steepness, center } = *p {
                    if !(steepness.is_finite() && steepness > 0.0) {
                        return Err(Error::InvalidFunction(format!(
                            "logistic steepness must be positive, got {steepness}"
                        )));
                    }
                    if !(0.0..=1.0).contains(&center) {
                        return Err(Error::InvalidFunction(format!(
                            "logistic center {center} outside [0, 1]"
                        )));
                    }
                }
                let mut prev = f64::NEG_INFINITY;
                for i in 0..=PRESET_CHECK_GRID {
                    let v = p.value(i as f64 / PRESET_CHECK_GRID as f64);
                    if !(0.0..=1.0).contains(&v) || v < prev {
                        return Err(Error::InvalidFunction(format!(
                            "preset {p:?} fails range/monotonicity check"
                        )));
                    }
                    prev = v;
                }
            }
        }
        Ok(())
    }

    /// Value at `x`. Errors if `x` is outside `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("point {x} outside [0, 1]")));
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation for hot loops; `x` must lie in `[0, 1]`.
    #[inline]
    pub(crate) fn value(&self, x: f64) -> f64 {
        match self {
            MonotoneFunction::UnitStep { x0 } => {
                if x >= *x0 {
                    1.0
                } else {
                    0.0
                }
            }
            MonotoneFunction::Staircase { alphas } => alphas[staircase_cell(x, alphas.len())],
            MonotoneFunction::Preset(p) => p.value(x),
        }
    }

    /// `S(f) = ∫₀¹ f`.
    pub fn exact_integral(&self) -> f64 {
        match self {
            MonotoneFunction::UnitStep { x0 } => 1.0 - x0,
            MonotoneFunction::Staircase { alphas } => {
                alphas.iter().sum::<f64>() / alphas.len() as f64
            }
            MonotoneFunction::Preset(p) => quadrature::integrate(|x| p.value(x), 0.0, 1.0, DEFAULT_TOL),
        }
    }

    /// `∫_a^b f` for `0 ≤ a ≤ b ≤ 1`, exact for steps and staircases.
    fn integral_over(&self, a: f64, b: f64) -> f64 {
        match self {
            MonotoneFunction::UnitStep { x0 } => b - x0.clamp(a, b),
            MonotoneFunction::Staircase { alphas } => {
                cell_overlaps(alphas.len(), a, b).map(|(k, len)| alphas[k] * len).sum()
            }
            MonotoneFunction::Preset(p) => quadrature::integrate(|x| p.value(x), a, b, DEFAULT_TOL),
        }
    }

    /// `∫_a^b f²`.
    fn square_integral_over(&self, a: f64, b: f64) -> f64 {
        match self {
            MonotoneFunction::UnitStep { .. } => self.integral_over(a, b),
            MonotoneFunction::Staircase { alphas } => cell_overlaps(alphas.len(), a, b)
                .map(|(k, len)| alphas[k] * alphas[k] * len)
                .sum(),
            MonotoneFunction::Preset(p) => quadrature::integrate(
                |x| {
                    let v = p.value(x);
                    v * v
                },
                a,
                b,
                DEFAULT_TOL,
            ),
        }
    }

    /// Mean and mean-of-square of `f(U)` for `U` uniform on `[a, b]`.
    pub fn moments_on_interval(&self, a: f64, b: f64) -> Result<Moments> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::Domain(format!("interval [{a}, {b}] not inside [0, 1]")));
        }
        if a >= b {
            return Err(Error::Domain(format!("degenerate interval [{a}, {b}]")));
        }
        let len = b - a;
        Ok(Moments {
            mean: self.integral_over(a, b) / len,
            mean_square: self.square_integral_over(a, b) / len,
        })
    }

    /// `Var(f(X) − X)` for `X` uniform on `[0, 1]`.
    pub fn var_fx_minus_x(&self) -> f64 {
        // E[(f(X) - X)^2] - (S(f) - 1/2)^2
        let second = match self {
            MonotoneFunction::UnitStep { x0 } => {
                let t = 1.0 - x0;
                (x0 * x0 * x0 + t * t * t) / 3.0
            }
            MonotoneFunction::Staircase { alphas } => {
                let m = alphas.len() as f64;
                alphas
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| {
                        let lo = k as f64 / m;
                        let hi = (k + 1) as f64 / m;
                        ((hi - a).powi(3) - (lo - a).powi(3)) / 3.0
                    })
                    .sum()
            }
            MonotoneFunction::Preset(p) => quadrature::integrate(
                |x| {
                    let d = p.value(x) - x;
                    d * d
                },
                0.0,
                1.0,
                DEFAULT_TOL,
            ),
        };
        let shift = self.exact_integral() - 0.5;
        (second - shift * shift).max(0.0)
    }

    /// Cell-average projection onto the staircase class with `m` pieces.
    pub fn project_staircase(&self, m: usize) -> Result<MonotoneFunction> {
        if m == 0 {
            return Err(Error::InvalidConfig("staircase projection needs m >= 1".into()));
        }
        let mf = m as f64;
        let mut alphas = Vec::with_capacity(m);
        let mut floor = 0.0_f64;
        for k in 0..m {
            let a = k as f64 / mf;
            let b = (k + 1) as f64 / mf;
            let avg = (self.integral_over(a, b) / (b - a)).clamp(0.0, 1.0);
            // quadrature noise must not break monotonicity
            floor = floor.max(avg);
            alphas.push(floor);
        }
        Ok(MonotoneFunction::Staircase { alphas })
    }

    /// If this function is a.e. a unit step (levels all 0 or 1), its jump location.
    pub fn as_unit_step(&self) -> Option<f64> {
        match self {
            MonotoneFunction::UnitStep { x0 } => Some(*x0),
            MonotoneFunction::Staircase { alphas } => {
                if alphas.iter().all(|&a| a == 0.0 || a == 1.0) {
                    let first_one = alphas.iter().position(|&a| a == 1.0).unwrap_or(alphas.len());
                    Some(first_one as f64 / alphas.len() as f64)
                } else {
                    None
                }
            }
            MonotoneFunction::Preset(_) => None,
        }
    }

    /// Whether the integral and moments are computed in closed form.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self, MonotoneFunction::Preset(_))
    }
}

/// First two raw moments of `f(U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub mean_square: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        (self.mean_square - self.mean * self.mean).max(0.0)
    }
}

/// 0-based index of the staircase cell `((k)/m, (k+1)/m]` containing `x`;
/// `x = 0` belongs to cell 0.
///
/// Boundaries are compared against the rounded quotient `k/m`, so a point
/// computed as `i/j` with `i/j = k/m` exactly lands on the same side
/// regardless of how `x * m` rounds.
pub fn staircase_cell(x: f64, m: usize) -> usize {
    let mf = m as f64;
    let mut k = ((x * mf).ceil() as usize).clamp(1, m);
    while k > 1 && x <= (k - 1) as f64 / mf {
        k -= 1;
    }
    while k < m && x > k as f64 / mf {
        k += 1;
    }
    k - 1
}

/// Lengths of overlap between `[a, b]` and each of the `m` equal cells.
fn cell_overlaps(m: usize, a: f64, b: f64) -> impl Iterator<Item = (usize, f64)> {
    let mf = m as f64;
    let first = ((a * mf).floor() as usize).min(m - 1);
    let last = ((b * mf).ceil() as usize).clamp(first + 1, m);
    (first..last).filter_map(move |k| {
        let lo = (k as f64 / mf).max(a);
        let hi = ((k + 1) as f64 / mf).min(b);
        (hi > lo).then_some((k, hi - lo))
    })
}
