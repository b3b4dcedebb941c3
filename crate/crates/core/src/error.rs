use thiserror::Error;

/// Failures of exact scalar arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by a symbolically zero value")]
    DivisionByZero,
    #[error("non-integer power of a negative number")]
    NegativeRoot,
    #[error("non-integer power of a sum is not representable")]
    NonMonomialRoot,
    #[error("cannot factor {0} into small primes for a radical")]
    Unfactorable(String),
    #[error("gamma argument {0} is not positive")]
    GammaDomain(String),
    #[error("exponential frequency must not have a symbolic denominator")]
    RationalFrequency,
}

/// Failures while turning symbolic values into floating point numbers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("parameter `{0}` has no numeric value")]
    UnboundParameter(String),
    #[error("evaluation overflowed or produced NaN in {0}")]
    NonFinite(String),
    #[error("gamma is undefined at {0}")]
    GammaDomain(f64),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("reference value unavailable: {0}")]
    Reference(String),
}

/// Failures of truncated series arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series have different alpha ({0} vs {1})")]
    AlphaMismatch(String, String),
    #[error("argument scale must be a positive rational, got {0}")]
    NonPositiveScale(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Failures of the coefficient recurrence and its verifier.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("term {term}: time-dependent coefficient is off the t^(k*alpha) grid for alpha = {alpha}")]
    TimeCoefficientIncompatible { term: usize, alpha: String },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("right-hand side is not linear in psi")]
    NotLinear,
    #[error("truncation order {order} is below the minimum {min} for this problem")]
    OrderTooSmall { order: usize, min: usize },
}
