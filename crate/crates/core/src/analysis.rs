//! Closed-form worst-case errors and lower bounds over the monotone class.
//!
//! Worst cases (squared `L²` error, i.e. variance for the unbiased rules):
//!
//! | rule | worst case | attained at |
//! |------|-----------|-------------|
//! | simple MC, `n` points | `1/(4n)` | step at `1/2` |
//! | control variate | `1/(12n)` | any unit step |
//! | stratified | `¼ max_k w_k²/n_k` | step at the middle of an argmax stratum |
//! | trapezoid (deterministic) | error `1/(2(n+1))` | step just past a node |
//!
//! Any nonsequential method with `n` points has worst-case `L^p` error at
//! least `(1/2)^{2+1/p}/n`, hence worst-case variance at least `1/(32n²)`
//! when unbiased.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, StrataSpec};
use crate::format;
use crate::function_model::{staircase_cell, MonotoneFunction};
use crate::rng::{RngStream, SimRng};

/// A closed-form worst-case variance together with a function attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCertificate {
    pub spec: EstimatorSpec,
    pub worst_case_variance: f64,
    pub witness: MonotoneFunction,
}

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    Ok(())
}

pub fn worst_case_var_mc(n: usize) -> Result<f64> {
    require_n(n)?;
    Ok(1.0 / (4.0 * n as f64))
}

pub fn worst_case_var_cv(n: usize) -> Result<f64> {
    require_n(n)?;
    Ok(1.0 / (12.0 * n as f64))
}

/// `¼ max_k w_k²/n_k` with a unit step at the midpoint of the first argmax stratum.
pub fn worst_case_var_stratified(strata: &StrataSpec) -> Result<VarianceCertificate> {
    strata.validate()?;
    let weights = strata.weights();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, (w, &nk)) in weights.iter().zip(strata.allocation()).enumerate() {
        let score = w * w / nk as f64;
        if score > best.1 {
            best = (k, score);
        }
    }
    let (lo, hi) = strata.interval(best.0);
    Ok(VarianceCertificate {
        spec: EstimatorSpec::Stratified(strata.clone()),
        worst_case_variance: 0.25 * best.1,
        witness: MonotoneFunction::UnitStep { x0: 0.5 * (lo + hi) },
    })
}

/// Worst case over functions whose increment across stratum `k` is `Δ_k`:
/// `¼ Σ_k w_k² Δ_k² / n_k`.
pub fn worst_case_var_stratified_restricted(strata: &StrataSpec, deltas: &[f64]) -> Result<f64> {
    strata.validate()?;
    if deltas.len() != strata.strata() {
        return Err(Error::InvalidConfig(format!(
            "{} increments for {} strata",
            deltas.len(),
            strata.strata()
        )));
    }
    if deltas.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::InvalidConfig("increments must be non-negative".into()));
    }
    if deltas.iter().sum::<f64>() > 1.0 + 1e-12 {
        return Err(Error::InvalidConfig("increments must sum to at most 1".into()));
    }
    Ok(0.25
        * strata
            .weights()
            .iter()
            .zip(strata.allocation())
            .zip(deltas)
            .map(|((w, &nk), d)| w * w * d * d / nk as f64)
            .sum::<f64>())
}

/// Certificate for any randomized rule; the trapezoid rule has no variance.
pub fn worst_case_certificate(spec: &EstimatorSpec) -> Result<VarianceCertificate> {
    spec.validate()?;
    match spec {
        EstimatorSpec::SimpleMc { n } => Ok(VarianceCertificate {
            spec: spec.clone(),
            worst_case_variance: worst_case_var_mc(*n)?,
            witness: MonotoneFunction::UnitStep { x0: 0.5 },
        }),
        EstimatorSpec::ControlVariate { n } => Ok(VarianceCertificate {
            spec: spec.clone(),
            worst_case_variance: worst_case_var_cv(*n)?,
            witness: MonotoneFunction::UnitStep { x0: 0.5 },
        }),
        EstimatorSpec::Stratified(s) => worst_case_var_stratified(s),
        EstimatorSpec::Trapezoid { .. } => Err(Error::Deterministic),
    }
}

/// Lower bound `(1/2)^{2+1/p} / n` on the worst-case `L^p` error of any
/// nonsequential method with `n` evaluations. `p = ∞` is allowed.
pub fn lower_bound_lp(n: usize, p: f64) -> Result<f64> {
    require_n(n)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidConfig(format!("error exponent p = {p} must be >= 1")));
    }
    Ok(0.5_f64.powf(2.0 + 1.0 / p) / n as f64)
}

/// `1/(32n²)`: lower bound on the worst-case variance of unbiased methods.
pub fn variance_lower_bound(n: usize) -> Result<f64> {
    require_n(n)?;
    let n = n as f64;
    Ok(1.0 / (32.0 * n * n))
}

/// `K = n` equal strata, one point each (one-dimensional Latin hypercube).
pub fn optimal_strata(n: usize) -> Result<StrataSpec> {
    require_n(n)?;
    StrataSpec::equal(n)
}

/// Worst-case absolute and squared error of the trapezoidal rule with `n` nodes.
pub fn trapezoid_worst_case(n: usize) -> Result<(f64, f64)> {
    require_n(n)?;
    let e = 1.0 / (2.0 * (n + 1) as f64);
    Ok((e, e * e))
}

/// Two functions that agree outside one cell of the `2n`-grid, chosen where a
/// given sampler most often leaves that cell empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialPair {
    /// `1` on the cell and to its right, `0` to its left.
    pub f1: MonotoneFunction,
    /// `0` on the cell and to its left, `1` to its right.
    pub f2: MonotoneFunction,
    /// 0-based cell index in the `2n`-grid.
    pub cell: usize,
    pub interval: (f64, f64),
    /// Empirical probability that no evaluation point lands in the cell.
    pub miss_probability: f64,
    pub per_cell_miss: Vec<f64>,
    pub replications: usize,
}

impl AdversarialPair {
    /// `S(f1) − S(f2)`, equal to the cell width `1/(2n)`.
    pub fn integral_gap(&self) -> f64 {
        self.f1.exact_integral() - self.f2.exact_integral()
    }
}

/// Builds the adversarial pair for a point sampler. Replication `r` draws from
/// stream `(seed, r)`. Cell membership follows the staircase convention, so
/// `f1` and `f2` agree at every point that misses the chosen cell.
pub fn adversarial_pair<S>(n: usize, sampler: S, replications: usize, seed: u64) -> Result<AdversarialPair>
where
    S: Fn(&mut SimRng) -> Vec<f64>,
{
    require_n(n)?;
    if replications == 0 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    let cells = 2 * n;
    let mut misses = vec![0u64; cells];
    let mut hit = vec![false; cells];
    for r in 0..replications {
        hit.iter_mut().for_each(|h| *h = false);
        let mut rng = RngStream::new(seed, r as u64).open();
        for x in sampler(&mut rng) {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("sampler produced point {x} outside [0, 1]")));
            }
            hit[staircase_cell(x, cells)] = true;
        }
        for (m, h) in misses.iter_mut().zip(&hit) {
            *m += u64::from(!h);
        }
    }
    let per_cell_miss: Vec<f64> = misses.iter().map(|&m| m as f64 / replications as f64).collect();
    let mut cell = 0;
    for (k, &m) in misses.iter().enumerate() {
        if m > misses[cell] {
            cell = k;
        }
    }
    let f1 = (0..cells).map(|k| if k >= cell { 1.0 } else { 0.0 }).collect();
    let f2 = (0..cells).map(|k| if k > cell { 1.0 } else { 0.0 }).collect();
    Ok(AdversarialPair {
        f1: MonotoneFunction::Staircase { alphas: f1 },
        f2: MonotoneFunction::Staircase { alphas: f2 },
        cell,
        interval: (cell as f64 / cells as f64, (cell + 1) as f64 / cells as f64),
        miss_probability: per_cell_miss[cell],
        per_cell_miss,
        replications,
    })
}

/// One row of the bound comparison table (squared-error scale, `p = 2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub p: f64,
    /// `(1/2)^{2.5}/n`.
    pub lp_lower_bound: f64,
    /// `1/(32n²)`.
    pub variance_lower_bound: f64,
    pub mc_worst_case: f64,
    pub cv_worst_case: f64,
    pub lhs_worst_case: f64,
    /// `min(1/(12n), 1/(4n²))`.
    pub best_unbiased_upper_bound: f64,
    /// Best unbiased bound over the variance lower bound.
    pub ratio_unbiased: f64,
    /// `1/(4(n+1)²)`.
    pub trapezoid_squared_error: f64,
    /// Best unbiased bound over the trapezoid squared error.
    pub ratio_trapezoid: f64,
}

pub const BOUND_REPORT_COLUMNS: [&str; 10] = [
    "n",
    "lp_lb_p2",
    "var_lb",
    "mc_wc",
    "cv_wc",
    "lhs_wc",
    "best_unbiased",
    "ratio_unbiased",
    "trap_sq_err",
    "ratio_trap",
];

fn to_f64(r: Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl BoundReport {
    /// Rational columns are computed exactly and rounded once.
    pub fn for_n(n: usize) -> Result<Self> {
        require_n(n)?;
        let n128 = n as u128;
        let var_lb = Ratio::new(1, 32 * n128 * n128);
        let mc = Ratio::new(1, 4 * n128);
        let cv = Ratio::new(1, 12 * n128);
        let lhs = Ratio::new(1, 4 * n128 * n128);
        let best = cv.min(lhs);
        let trap = Ratio::new(1, 4 * (n128 + 1) * (n128 + 1));
        Ok(Self {
            n,
            p: 2.0,
            lp_lower_bound: lower_bound_lp(n, 2.0)?,
            variance_lower_bound: to_f64(var_lb),
            mc_worst_case: to_f64(mc),
            cv_worst_case: to_f64(cv),
            lhs_worst_case: to_f64(lhs),
            best_unbiased_upper_bound: to_f64(best),
            ratio_unbiased: to_f64(best / var_lb),
            trapezoid_squared_error: to_f64(trap),
            ratio_trapezoid: to_f64(best / trap),
        })
    }

    pub fn csv_header() -> String {
        format::csv_record(BOUND_REPORT_COLUMNS)
    }

    pub fn csv_row(&self) -> String {
        let mut fields = vec![self.n.to_string()];
        fields.extend(
            [
                self.lp_lower_bound,
                self.variance_lower_bound,
                self.mc_worst_case,
                self.cv_worst_case,
                self.lhs_worst_case,
                self.best_unbiased_upper_bound,
                self.ratio_unbiased,
                self.trapezoid_squared_error,
                self.ratio_trapezoid,
            ]
            .into_iter()
            .map(format::float),
        );
        format::csv_record(fields)
    }
}

/// Rows `n = 1..=n_max`.
pub fn ratio_table(n_max: usize) -> Result<Vec<BoundReport>> {
    if n_max == 0 {
        return Err(Error::InvalidConfig("n_max must be at least 1".into()));
    }
    (1..=n_max).map(BoundReport::for_n).collect()
}

/// The table as CSV with a header row.
pub fn ratio_table_csv(n_max: usize) -> Result<String> {
    let rows = ratio_table(n_max)?;
    let mut out = BoundReport::csv_header();
    for r in &rows {
        out.push_str(&r.csv_row());
    }
    Ok(out)
}
