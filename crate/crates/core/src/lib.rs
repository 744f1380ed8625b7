//! Unbiased Monte Carlo integration of bounded monotone functions on `[0, 1]`.
//!
//! The crate covers four integration rules for non-decreasing `f: [0,1] → [0,1]`
//! (plain Monte Carlo, a control variate, stratified sampling and the
//! trapezoidal rule), their closed-form worst-case errors over that class, the
//! matching lower bounds, and an oracle layer that checks every closed form
//! by exact computation, exhaustive search and replication.
//!
//! ```
//! use monoquad::analysis;
//! use monoquad::estimators::EstimatorSpec;
//! use monoquad::oracle;
//!
//! let strata = analysis::optimal_strata(4).unwrap();
//! let cert = analysis::worst_case_var_stratified(&strata).unwrap();
//! assert_eq!(cert.worst_case_variance, 1.0 / 64.0);
//!
//! let spec = EstimatorSpec::Stratified(strata);
//! let exact = oracle::exact_estimator_variance(&spec, &cert.witness).unwrap();
//! assert!((exact - 1.0 / 64.0).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod format;
pub mod function_model;
pub mod oracle;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use estimators::{EstimatorSpec, Nonsequential, StrataSpec};
pub use function_model::{MonotoneFunction, Preset};
pub use rng::RngStream;
