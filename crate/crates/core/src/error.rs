use thiserror::Error;

/// Errors raised by the problem model, subproblem solvers and outer loops.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem constants: {0}")]
    InvalidConstants(String),

    #[error("concavity violation: -hess_yy is not positive definite at the queried point")]
    ConcavityViolation,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("trust-region radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("cubic regularization weight must be positive and finite, got {0}")]
    InvalidRegularization(f64),

    #[error("shifted system H + {0}I is not positive definite")]
    Indefinite(f64),

    #[error("lambda search bracket violated: {0}")]
    BracketViolation(String),

    #[error("gradient ascent did not reach the target distance within {0} steps")]
    AscentNonTermination(usize),

    #[error("consistency loop stalled after {0} refinement rounds")]
    ConsistencyStalled(usize),

    #[error("step norm must be positive")]
    ZeroStep,

    #[error("schedule accuracy A = {0} must be positive")]
    InvalidAccuracy(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
