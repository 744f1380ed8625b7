//! Independent verification: exact estimator variances from first principles,
//! exhaustive search over discretized staircase classes, and replication
//! statistics.
//!
//! Nothing here consults the closed forms in [`crate::analysis`]; the two
//! layers are compared against each other in tests.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::VarianceCertificate;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorSpec, Nonsequential};
use crate::format;
use crate::function_model::{staircase_cell, MonotoneFunction};
use crate::rng::RngStream;

/// Default cap on enumerated candidates.
pub const DEFAULT_CANDIDATE_CAP: u64 = 10_000_000;

/// Acceptance band for z-tests, in standard errors.
pub const Z_BAND: f64 = 4.0;

/// Absolute slack for zero-variance cases where the estimate and the exact
/// integral differ only by rounding.
const ROUNDING_SLACK: f64 = 1e-12;

/// `Var(Ŝ(f))` assembled from interval moments.
pub fn exact_estimator_variance(spec: &EstimatorSpec, f: &MonotoneFunction) -> Result<f64> {
    spec.validate()?;
    f.validate()?;
    match spec {
        EstimatorSpec::SimpleMc { n } => Ok(f.moments_on_interval(0.0, 1.0)?.variance() / *n as f64),
        EstimatorSpec::ControlVariate { n } => Ok(f.var_fx_minus_x() / *n as f64),
        EstimatorSpec::Stratified(s) => {
            let mut total = 0.0;
            for (k, &nk) in s.allocation().iter().enumerate() {
                let (lo, hi) = s.interval(k);
                let w = hi - lo;
                total += w * w / nk as f64 * f.moments_on_interval(lo, hi)?.variance();
            }
            Ok(total)
        }
        EstimatorSpec::Trapezoid { .. } => Err(Error::Deterministic),
    }
}

/// Exact variance of the certificate's rule at its witness.
pub fn certify(cert: &VarianceCertificate) -> Result<f64> {
    exact_estimator_variance(&cert.spec, &cert.witness)
}

// ---------------------------------------------------------------------------
// Exhaustive search over F_m with levels on a 1/g grid

/// Objective that is a function of per-cell accumulated sums: each cell `k`
/// with level `α` adds `α·linear[k] + α²·quadratic[k]` to a small vector,
/// and `finish` maps the final vector to the objective value.
struct CellObjective {
    width: usize,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
    finish: Box<dyn Fn(&[f64]) -> f64 + Sync>,
}

impl CellObjective {
    fn variance(spec: &EstimatorSpec, m: usize) -> Result<Self> {
        spec.validate()?;
        let mf = m as f64;
        match spec {
            EstimatorSpec::SimpleMc { n } => {
                let n = *n as f64;
                let mut linear = vec![0.0; 2 * m];
                let mut quadratic = vec![0.0; 2 * m];
                for k in 0..m {
                    linear[2 * k] = 1.0 / mf;
                    quadratic[2 * k + 1] = 1.0 / mf;
                }
                Ok(Self {
                    width: 2,
                    linear,
                    quadratic,
                    finish: Box::new(move |a| (a[1] - a[0] * a[0]).max(0.0) / n),
                })
            }
            EstimatorSpec::ControlVariate { n } => {
                let n = *n as f64;
                let mut linear = vec![0.0; 3 * m];
                let mut quadratic = vec![0.0; 3 * m];
                for k in 0..m {
                    linear[3 * k] = 1.0 / mf;
                    quadratic[3 * k + 1] = 1.0 / mf;
                    // ∫ x dx over the cell
                    linear[3 * k + 2] = (2 * k + 1) as f64 / (2.0 * mf * mf);
                }
                Ok(Self {
                    width: 3,
                    linear,
                    quadratic,
                    finish: Box::new(move |a| {
                        let var_f = a[1] - a[0] * a[0];
                        let cov = a[2] - 0.5 * a[0];
                        (var_f - 2.0 * cov + 1.0 / 12.0).max(0.0) / n
                    }),
                })
            }
            EstimatorSpec::Stratified(s) => {
                let strata = s.strata();
                let width = 2 * strata;
                let mut linear = vec![0.0; width * m];
                let mut quadratic = vec![0.0; width * m];
                let mut scale = Vec::with_capacity(strata);
                for j in 0..strata {
                    let (lo, hi) = s.interval(j);
                    let w = hi - lo;
                    scale.push(w * w / s.allocation()[j] as f64);
                    for k in 0..m {
                        let a = (k as f64 / mf).max(lo);
                        let b = ((k + 1) as f64 / mf).min(hi);
                        if b > a {
                            linear[k * width + 2 * j] = (b - a) / w;
                            quadratic[k * width + 2 * j + 1] = (b - a) / w;
                        }
                    }
                }
                Ok(Self {
                    width,
                    linear,
                    quadratic,
                    finish: Box::new(move |a| {
                        scale
                            .iter()
                            .enumerate()
                            .map(|(j, c)| c * (a[2 * j + 1] - a[2 * j] * a[2 * j]).max(0.0))
                            .sum()
                    }),
                })
            }
            EstimatorSpec::Trapezoid { .. } => Err(Error::Deterministic),
        }
    }

    /// `|S(f) − T_n(f)|` for the trapezoidal rule with `n` nodes.
    fn trapezoid_error(n: usize, m: usize) -> Self {
        let mf = m as f64;
        let h = 1.0 / (n + 1) as f64;
        let mut linear = vec![1.0 / mf; m];
        for i in 1..=n {
            let x = i as f64 / (n + 1) as f64;
            linear[staircase_cell(x, m)] -= h;
        }
        Self {
            width: 1,
            linear,
            quadratic: vec![0.0; m],
            finish: Box::new(move |a| (a[0] - 0.5 * h).abs()),
        }
    }

    fn value(&self, levels: &[usize], g: usize) -> f64 {
        let mut acc = vec![0.0; self.width];
        for (k, &l) in levels.iter().enumerate() {
            let alpha = l as f64 / g as f64;
            self.push(&mut acc, k, alpha);
        }
        (self.finish)(&acc)
    }

    #[inline]
    fn push(&self, acc: &mut [f64], cell: usize, alpha: f64) {
        let lin = &self.linear[cell * self.width..(cell + 1) * self.width];
        let quad = &self.quadratic[cell * self.width..(cell + 1) * self.width];
        let a2 = alpha * alpha;
        for ((s, l), q) in acc.iter_mut().zip(lin).zip(quad) {
            *s += alpha * l + a2 * q;
        }
    }
}

/// Number of non-decreasing `m`-tuples over `{0, …, g}`: `C(m+g, g)`.
/// Saturates at `u128::MAX`.
pub fn candidate_count(m: usize, g: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=g.min(m) as u128 {
        let top = (m.max(g) as u128) + i;
        c = match c.checked_mul(top) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    c
}

/// Limits for [`brute_force_max_variance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub cap: u64,
    /// Fall back to coordinate ascent instead of failing when over the cap.
    pub allow_heuristic: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CANDIDATE_CAP,
            allow_heuristic: false,
        }
    }
}

/// Outcome of a search over `F_m` with levels `{0, 1/g, …, 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub m: usize,
    pub g: usize,
    pub max_value: f64,
    pub witness: MonotoneFunction,
    /// Candidates enumerated (or objective evaluations, for the heuristic).
    pub candidates: u64,
    /// True when found by coordinate ascent rather than exhaustive search.
    pub heuristic: bool,
}

struct Best {
    value: f64,
    levels: Vec<usize>,
}

fn dfs(obj: &CellObjective, g: usize, depth: usize, min_level: usize, levels: &mut [usize], acc: &mut [f64], best: &mut Best, count: &mut u64) {
    let m = levels.len();
    let w = obj.width;
    if depth == m {
        *count += 1;
        let v = (obj.finish)(&acc[m * w..]);
        if v > best.value {
            best.value = v;
            best.levels.copy_from_slice(levels);
        }
        return;
    }
    for l in min_level..=g {
        let alpha = l as f64 / g as f64;
        let (prev, next) = acc.split_at_mut((depth + 1) * w);
        next[..w].copy_from_slice(&prev[depth * w..]);
        obj.push(&mut next[..w], depth, alpha);
        levels[depth] = l;
        dfs(obj, g, depth + 1, l, levels, acc, best, count);
    }
}

fn exhaustive(obj: &CellObjective, m: usize, g: usize) -> (Best, u64) {
    let mut best = Best {
        value: f64::NEG_INFINITY,
        levels: vec![0; m],
    };
    let mut levels = vec![0; m];
    let mut acc = vec![0.0; (m + 1) * obj.width];
    let mut count = 0;
    dfs(obj, g, 0, 0, &mut levels, &mut acc, &mut best, &mut count);
    (best, count)
}

/// Coordinate ascent over blocks of equal levels: each maximal block may move
/// to any level between its neighbours. Started from every grid unit step.
fn coordinate_ascent(obj: &CellObjective, m: usize, g: usize) -> (Best, u64) {
    let mut evals: u64 = 0;
    let mut best = Best {
        value: f64::NEG_INFINITY,
        levels: vec![0; m],
    };
    for jump in 0..=m {
        let mut levels: Vec<usize> = (0..m).map(|k| if k >= jump { g } else { 0 }).collect();
        let mut value = obj.value(&levels, g);
        evals += 1;
        loop {
            let mut improved = false;
            let mut start = 0;
            while start < m {
                let mut end = start;
                while end + 1 < m && levels[end + 1] == levels[start] {
                    end += 1;
                }
                let lo = if start == 0 { 0 } else { levels[start - 1] };
                let hi = if end + 1 == m { g } else { levels[end + 1] };
                let current = levels[start];
                let mut best_level = current;
                for l in lo..=hi {
                    if l == current {
                        continue;
                    }
                    levels[start..=end].iter_mut().for_each(|x| *x = l);
                    let v = obj.value(&levels, g);
                    evals += 1;
                    if v > value {
                        value = v;
                        best_level = l;
                        improved = true;
                    }
                }
                levels[start..=end].iter_mut().for_each(|x| *x = best_level);
                start = end + 1;
            }
            if !improved {
                break;
            }
        }
        if value > best.value {
            best = Best { value, levels };
        }
    }
    (best, evals)
}

fn search(obj: CellObjective, m: usize, g: usize, opts: &SearchOptions) -> Result<SearchResult> {
    if m == 0 || g == 0 {
        return Err(Error::InvalidConfig("search needs m >= 1 and g >= 1".into()));
    }
    let count = candidate_count(m, g);
    let (best, candidates, heuristic) = if count <= u128::from(opts.cap) {
        let (b, c) = exhaustive(&obj, m, g);
        (b, c, false)
    } else if opts.allow_heuristic {
        let (b, c) = coordinate_ascent(&obj, m, g);
        (b, c, true)
    } else {
        return Err(Error::Budget {
            candidates: count,
            cap: u128::from(opts.cap),
        });
    };
    Ok(SearchResult {
        m,
        g,
        max_value: best.value,
        witness: MonotoneFunction::Staircase {
            alphas: best.levels.iter().map(|&l| l as f64 / g as f64).collect(),
        },
        candidates,
        heuristic,
    })
}

/// Maximum exact variance of a randomized rule over monotone staircases with
/// `m` pieces and levels in `{0, 1/g, …, 1}`. The witness is the first
/// maximizer in lexicographic order.
pub fn brute_force_max_variance(spec: &EstimatorSpec, m: usize, g: usize, opts: &SearchOptions) -> Result<SearchResult> {
    search(CellObjective::variance(spec, m)?, m, g, opts)
}

/// Maximum of `|S(f) − T_n(f)|` for the trapezoidal rule over the same class.
pub fn brute_force_max_trapezoid_error(n: usize, m: usize, g: usize, opts: &SearchOptions) -> Result<SearchResult> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    search(CellObjective::trapezoid_error(n, m), m, g, opts)
}

// ---------------------------------------------------------------------------
// Replication

/// Inputs for a replicated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub estimator: EstimatorSpec,
    pub function: MonotoneFunction,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_p() -> f64 {
    2.0
}

impl ExperimentConfig {
    pub fn new(estimator: EstimatorSpec, function: MonotoneFunction, replications: usize, seed: u64) -> Self {
        Self {
            estimator,
            function,
            replications,
            seed,
            p: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator.validate()?;
        self.function.validate()?;
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if !(self.p >= 1.0) {
            return Err(Error::InvalidConfig(format!("error exponent p = {} must be >= 1", self.p)));
        }
        Ok(())
    }
}

pub const REPORT_SCHEMA: u32 = 1;

/// Summary of a replicated run.
///
/// `empirical_variance` uses the `R − 1` denominator (0 when `R = 1`) and
/// `standard_error = √(empirical_variance / R)`. Tolerance bands built on it
/// assume the normal approximation, adequate for `R ≥ 10⁵`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub estimator: String,
    pub budget: usize,
    pub replications: usize,
    pub seed: u64,
    pub p: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub empirical_lp_error: f64,
    pub exact_integral: f64,
    pub exact_variance: Option<f64>,
    pub standard_error: f64,
    pub variance_denominator: String,
    /// Not serialized, so that reports are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

pub const REPORT_COLUMNS: [&str; 13] = [
    "schema",
    "estimator",
    "budget",
    "replications",
    "seed",
    "p",
    "empirical_mean",
    "empirical_variance",
    "empirical_lp_error",
    "exact_integral",
    "exact_variance",
    "standard_error",
    "variance_denominator",
];

impl Report {
    pub fn csv_header() -> String {
        format::csv_record(REPORT_COLUMNS)
    }

    pub fn csv_row(&self) -> String {
        format::csv_record([
            self.schema.to_string(),
            self.estimator.clone(),
            self.budget.to_string(),
            self.replications.to_string(),
            self.seed.to_string(),
            format::float(self.p),
            format::float(self.empirical_mean),
            format::float(self.empirical_variance),
            format::float(self.empirical_lp_error),
            format::float(self.exact_integral),
            self.exact_variance.map(format::float).unwrap_or_default(),
            format::float(self.standard_error),
            self.variance_denominator.clone(),
        ])
    }
}

/// Neumaier-compensated sum in slice order.
fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Sample mean and `R − 1` variance.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, ss / (r - 1.0))
}

/// `(mean |S − Ŝ_r|^p)^{1/p}`; `p = ∞` gives the maximum.
pub fn lp_error_of(estimates: &[f64], exact: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return estimates.iter().map(|e| (exact - e).abs()).fold(0.0, f64::max);
    }
    let mean = compensated_sum(estimates.iter().map(|e| (exact - e).abs().powf(p))) / estimates.len() as f64;
    mean.powf(1.0 / p)
}

/// Estimates from replications `0..R` on streams `(seed, r)`, in order.
/// Runs on the current rayon pool; the output does not depend on its size.
pub fn replicate<M>(method: &M, f: &MonotoneFunction, replications: usize, seed: u64) -> Vec<f64>
where
    M: Nonsequential + Sync,
{
    (0..replications as u64)
        .into_par_iter()
        .map(|r| method.estimate(f, &mut RngStream::new(seed, r).open()))
        .collect()
}

/// Runs the configured experiment on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let estimates = replicate(&config.estimator, &config.function, config.replications, config.seed);
    let exact_integral = config.function.exact_integral();
    let exact_variance = if config.estimator.is_randomized() {
        Some(exact_estimator_variance(&config.estimator, &config.function)?)
    } else {
        Some(0.0)
    };
    let (mean, variance) = mean_and_variance(&estimates);
    Ok(Report {
        schema: REPORT_SCHEMA,
        estimator: config.estimator.name().to_string(),
        budget: config.estimator.budget(),
        replications: config.replications,
        seed: config.seed,
        p: config.p,
        empirical_mean: mean,
        empirical_variance: variance,
        empirical_lp_error: lp_error_of(&estimates, exact_integral, config.p),
        exact_integral,
        exact_variance,
        standard_error: (variance / config.replications as f64).sqrt(),
        variance_denominator: "R-1".to_string(),
        wall_time: start.elapsed(),
    })
}

/// Runs the experiment on a dedicated pool with `jobs` workers.
pub fn run_experiment_with_jobs(config: &ExperimentConfig, jobs: usize) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

/// Result of a z-test of the empirical mean against the exact integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessCheck {
    pub pass: bool,
    pub z: f64,
    pub empirical_mean: f64,
    pub exact_integral: f64,
    pub standard_error: f64,
}

/// Pass iff `|mean − exact| ≤ 4·SE` (plus rounding slack when `SE = 0`).
pub fn check_unbiasedness(estimates: &[f64], exact_integral: f64) -> UnbiasednessCheck {
    let (mean, var) = mean_and_variance(estimates);
    let se = (var / estimates.len() as f64).sqrt();
    let diff = mean - exact_integral;
    let z = if se > 0.0 {
        diff / se
    } else if diff.abs() <= ROUNDING_SLACK {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    UnbiasednessCheck {
        pass: diff.abs() <= Z_BAND * se + ROUNDING_SLACK,
        z,
        empirical_mean: mean,
        exact_integral,
        standard_error: se,
    }
}

pub fn verify_unbiasedness(spec: &EstimatorSpec, f: &MonotoneFunction, replications: usize, seed: u64) -> Result<UnbiasednessCheck> {
    let config = ExperimentConfig::new(spec.clone(), f.clone(), replications, seed);
    config.validate()?;
    if !spec.is_randomized() {
        return Err(Error::Deterministic);
    }
    let estimates = replicate(spec, f, replications, seed);
    Ok(check_unbiasedness(&estimates, f.exact_integral()))
}

/// Empirical `L^p` error with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpEstimate {
    pub value: f64,
    pub standard_error: f64,
}

/// Empirical `L^p` error and its standard error from a set of estimates.
pub fn lp_estimate_of(estimates: &[f64], exact: f64, p: f64) -> LpEstimate {
    let powers: Vec<f64> = estimates.iter().map(|e| (exact - e).abs().powf(p)).collect();
    let (m, v) = mean_and_variance(&powers);
    let se_m = (v / estimates.len() as f64).sqrt();
    let value = m.powf(1.0 / p);
    let standard_error = if m > 0.0 { value / (p * m) * se_m } else { 0.0 };
    LpEstimate { value, standard_error }
}

pub fn empirical_lp_error<M>(method: &M, f: &MonotoneFunction, p: f64, replications: usize, seed: u64) -> Result<LpEstimate>
where
    M: Nonsequential + Sync,
{
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::InvalidConfig(format!("error exponent p = {p} must be finite and >= 1")));
    }
    if replications == 0 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    f.validate()?;
    let estimates = replicate(method, f, replications, seed);
    Ok(lp_estimate_of(&estimates, f.exact_integral(), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;
    use crate::estimators::StrataSpec;
    use crate::function_model::Preset;
    use crate::rng::SimRng;

    fn step(x0: f64) -> MonotoneFunction {
        MonotoneFunction::unit_step(x0).unwrap()
    }

    #[test]
    fn exact_variance_examples() {
        let v = exact_estimator_variance(&EstimatorSpec::SimpleMc { n: 4 }, &step(0.5)).unwrap();
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
        let v = exact_estimator_variance(&EstimatorSpec::ControlVariate { n: 3 }, &step(0.2)).unwrap();
        assert!((v - 1.0 / 36.0).abs() < 1e-15);
        let spec = EstimatorSpec::Stratified(analysis::optimal_strata(4).unwrap());
        let v = exact_estimator_variance(&spec, &step(0.125)).unwrap();
        assert!((v - 1.0 / 64.0).abs() < 1e-15);
        assert_eq!(
            exact_estimator_variance(&EstimatorSpec::Trapezoid { n: 3 }, &step(0.5)),
            Err(Error::Deterministic)
        );
    }

    #[test]
    fn candidate_counts() {
        assert_eq!(candidate_count(4, 4), 70);
        assert_eq!(candidate_count(8, 8), 12_870);
        assert_eq!(candidate_count(1, 1), 2);
        assert_eq!(candidate_count(32, 8), 76_904_685);
        assert_eq!(candidate_count(1000, 1000), u128::MAX);
    }

    #[test]
    fn brute_force_examples() {
        let opts = SearchOptions::default();
        let r = brute_force_max_variance(&EstimatorSpec::ControlVariate { n: 1 }, 4, 4, &opts).unwrap();
        assert!((r.max_value - 1.0 / 12.0).abs() < 1e-12);
        assert!(r.witness.as_unit_step().is_some());
        assert_eq!(r.candidates, 70);

        let r = brute_force_max_variance(&EstimatorSpec::SimpleMc { n: 1 }, 4, 4, &opts).unwrap();
        assert!((r.max_value - 0.25).abs() < 1e-15);
        assert_eq!(r.witness, MonotoneFunction::Staircase { alphas: vec![0.0, 0.0, 1.0, 1.0] });

        let spec = EstimatorSpec::Stratified(analysis::optimal_strata(2).unwrap());
        let r = brute_force_max_variance(&spec, 4, 4, &opts).unwrap();
        assert!((r.max_value - 1.0 / 16.0).abs() < 1e-15);
        let x0 = r.witness.as_unit_step().unwrap();
        assert!(x0 == 0.25 || x0 == 0.75, "{x0}");
    }

    #[test]
    fn two_candidates_at_minimal_grid() {
        let r = brute_force_max_variance(&EstimatorSpec::SimpleMc { n: 1 }, 1, 1, &SearchOptions::default()).unwrap();
        assert_eq!(r.candidates, 2);
        assert_eq!(r.max_value, 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let opts = SearchOptions { cap: 69, allow_heuristic: false };
        let err = brute_force_max_variance(&EstimatorSpec::SimpleMc { n: 1 }, 4, 4, &opts).unwrap_err();
        assert_eq!(err, Error::Budget { candidates: 70, cap: 69 });
    }

    #[test]
    fn heuristic_fallback_finds_unit_step_maximum() {
        let opts = SearchOptions { cap: 10, allow_heuristic: true };
        let r = brute_force_max_variance(&EstimatorSpec::ControlVariate { n: 2 }, 40, 40, &opts).unwrap();
        assert!(r.heuristic);
        assert!((r.max_value - 1.0 / 24.0).abs() < 1e-12);
        let spec = EstimatorSpec::Stratified(StrataSpec::new(vec![0.0, 0.3, 1.0], vec![1, 2]).unwrap());
        let r = brute_force_max_variance(&spec, 20, 20, &opts).unwrap();
        let closed = analysis::worst_case_var_stratified(
            &StrataSpec::new(vec![0.0, 0.3, 1.0], vec![1, 2]).unwrap(),
        )
        .unwrap()
        .worst_case_variance;
        assert!(r.max_value <= closed + 1e-12);
        assert!(r.max_value >= 0.95 * closed);
    }

    #[test]
    fn search_objective_matches_exact_variance() {
        let specs = [
            EstimatorSpec::SimpleMc { n: 3 },
            EstimatorSpec::ControlVariate { n: 2 },
            EstimatorSpec::Stratified(StrataSpec::new(vec![0.0, 0.3, 0.55, 1.0], vec![1, 2, 1]).unwrap()),
        ];
        let levels = [0usize, 1, 1, 3, 4, 4, 6];
        let g = 6;
        let f = MonotoneFunction::Staircase {
            alphas: levels.iter().map(|&l| l as f64 / g as f64).collect(),
        };
        for spec in &specs {
            let obj = CellObjective::variance(spec, levels.len()).unwrap();
            let a = obj.value(&levels, g);
            let b = exact_estimator_variance(spec, &f).unwrap();
            assert!((a - b).abs() < 1e-14, "{spec:?}: {a} vs {b}");
        }
    }

    #[test]
    fn trapezoid_search_attains_kiefer_bound() {
        let r = brute_force_max_trapezoid_error(1, 16, 8, &SearchOptions::default()).unwrap();
        assert!((r.max_value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn experiment_deterministic_rule() {
        let cfg = ExperimentConfig::new(EstimatorSpec::Trapezoid { n: 3 }, step(0.6), 1, 0);
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.empirical_variance, 0.0);
        assert_eq!(rep.standard_error, 0.0);
        assert_eq!(rep.exact_variance, Some(0.0));
        // nodes 1/4, 1/2, 3/4 -> (0 + 0 + 1 + 1/2)/4
        assert!((rep.empirical_mean - 0.375).abs() < 1e-15);
    }

    #[test]
    fn experiment_rejects_zero_replications() {
        let cfg = ExperimentConfig::new(EstimatorSpec::SimpleMc { n: 2 }, step(0.5), 0, 0);
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn reports_identical_across_pool_sizes() {
        let cfg = ExperimentConfig::new(
            EstimatorSpec::ControlVariate { n: 5 },
            MonotoneFunction::Preset(Preset::Sqrt),
            20_000,
            9,
        );
        let a = run_experiment_with_jobs(&cfg, 1).unwrap();
        let b = run_experiment_with_jobs(&cfg, 3).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn lp_error_is_non_decreasing_in_p() {
        let est = replicate(&EstimatorSpec::SimpleMc { n: 3 }, &step(0.4), 5000, 1);
        let ps = [1.0, 1.5, 2.0, 3.0, 8.0, f64::INFINITY];
        let vals: Vec<f64> = ps.iter().map(|&p| lp_error_of(&est, 0.6, p)).collect();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-15, "{vals:?}");
        }
    }

    #[test]
    fn l1_error_of_single_point_mc_on_centered_step() {
        let e = empirical_lp_error(&EstimatorSpec::SimpleMc { n: 1 }, &step(0.5), 1.0, 1000, 0).unwrap();
        assert_eq!(e.value, 0.5);
        assert_eq!(e.standard_error, 0.0);
    }

    #[test]
    fn l2_error_matches_variance_for_unbiased_rule() {
        let spec = EstimatorSpec::ControlVariate { n: 4 };
        let f = step(0.3);
        let e = empirical_lp_error(&spec, &f, 2.0, 200_000, 5).unwrap();
        let exact = exact_estimator_variance(&spec, &f).unwrap().sqrt();
        assert!((e.value - exact).abs() < 4.0 * e.standard_error + 1e-3 * exact, "{e:?} vs {exact}");
    }

    #[test]
    fn unbiasedness_zero_variance_case() {
        let chk = verify_unbiasedness(
            &EstimatorSpec::ControlVariate { n: 1 },
            &MonotoneFunction::Preset(Preset::Identity),
            100,
            0,
        )
        .unwrap();
        assert!(chk.pass);
        assert_eq!(chk.z, 0.0);
    }

    #[test]
    fn unbiasedness_stratified_square() {
        let spec = EstimatorSpec::Stratified(analysis::optimal_strata(8).unwrap());
        let chk = verify_unbiasedness(&spec, &MonotoneFunction::Preset(Preset::Square), 100_000, 0).unwrap();
        assert!(chk.pass, "{chk:?}");
    }

    struct Shifted(EstimatorSpec, f64);

    impl Nonsequential for Shifted {
        fn budget(&self) -> usize {
            self.0.budget()
        }
        fn is_randomized(&self) -> bool {
            true
        }
        fn sample_points(&self, rng: &mut SimRng) -> Vec<f64> {
            self.0.sample_points(rng)
        }
        fn combine(&self, points: &[f64], values: &[f64]) -> f64 {
            self.0.combine(points, values) + self.1
        }
    }

    #[test]
    fn biased_mutant_is_caught() {
        let f = MonotoneFunction::Preset(Preset::Square);
        let mutant = Shifted(EstimatorSpec::SimpleMc { n: 4 }, 0.01);
        let est = replicate(&mutant, &f, 1_000_000, 0);
        let chk = check_unbiasedness(&est, f.exact_integral());
        assert!(!chk.pass, "{chk:?}");
        assert!(chk.z > 20.0);
    }

    #[test]
    fn certificate_check() {
        let cert = analysis::worst_case_certificate(&EstimatorSpec::ControlVariate { n: 7 }).unwrap();
        assert!((certify(&cert).unwrap() - cert.worst_case_variance).abs() < 1e-12);
    }

    #[test]
    fn report_csv_has_fixed_columns() {
        let cfg = ExperimentConfig::new(EstimatorSpec::SimpleMc { n: 2 }, step(0.5), 10, 0);
        let rep = run_experiment(&cfg).unwrap();
        let header = Report::csv_header();
        let row = rep.csv_row();
        assert_eq!(header.split(',').count(), row.split(',').count());
        assert!(row.starts_with("1,simple_mc,2,10,0,2,"));
    }
}
