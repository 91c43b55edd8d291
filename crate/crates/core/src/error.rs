use thiserror::Error;

/// Errors raised by divergence computations.
///
/// Infinite divergences (support violations for KL and Jeffreys) are not
/// errors; they are returned in-band as `+∞`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivergenceError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("skew weight {0} is outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mean argument must be nonnegative and finite, got {0}")]
    NonPositiveInput(f64),
    #[error("weight {index} is negative or not finite ({value})")]
    InvalidWeight { index: usize, value: f64 },
    #[error("density has no positive weight")]
    ZeroDensity,
    #[error("weights sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("operation requires a normalized density")]
    RequiresNormalized,
    #[error("densities have disjoint supports")]
    DisjointSupport,
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("natural parameter outside the family's domain")]
    DomainViolation,
    #[error("cumulant function is not available in closed form")]
    CumulantUnavailable,
    #[error("degenerate crossover quadratic")]
    DegenerateQuadratic,
    #[error("proposal density vanishes where the integrand is positive")]
    ProposalSupportViolation,
    #[error("integral diverges")]
    DivergentIntegral,
    #[error("invalid bin map: {0}")]
    InvalidBinMap(String),
    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, DivergenceError>;
