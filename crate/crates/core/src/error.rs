use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or interval lies outside `[0, 1]`, or an interval is degenerate.
    #[error("domain error: {0}")]
    Domain(String),

    /// A function description violates monotonicity or range constraints.
    #[error("invalid monotone function: {0}")]
    InvalidFunction(String),

    /// Stratum boundaries or allocation violate their invariants.
    #[error("invalid strata: {0}")]
    InvalidStrata(String),

    /// An estimator or experiment description is not usable as given.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Variance was requested for a deterministic rule.
    #[error("deterministic estimator has zero variance; use exact error instead")]
    Deterministic,

    /// Exhaustive enumeration would exceed the configured candidate cap.
    #[error("enumeration needs {candidates} candidates, cap is {cap}")]
    Budget { candidates: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
