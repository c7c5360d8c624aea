use thiserror::Error;

/// Errors raised by state construction, measurements and the bound evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("factor dimensions {dims:?} do not multiply to {dim}")]
    BadFactorization { dims: Vec<usize>, dim: usize },

    #[error("eigendecomposition failed: {0}")]
    SpectralFailure(String),

    #[error("{outcomes} outcomes cannot resolve a spectrum spanning {required} levels")]
    InsufficientOutcomes { outcomes: usize, required: usize },

    #[error("POVM elements do not sum to the identity (residual {0:e})")]
    Incomplete(f64),

    #[error("discretization needs an odd dimension, got {0}")]
    EvenDimension(usize),

    #[error("generator eigenvalue {0} is not an integer")]
    NonIntegerSpectrum(f64),

    #[error("unsupported spin configuration: {0}")]
    UnsupportedSpin(String),

    #[error("state has weight {weight:e} outside the allowed support ({what})")]
    SupportViolation { what: String, weight: f64 },

    #[error("Euler grid too coarse: completeness residual {0:e} exceeds 0.05")]
    GridTooCoarse(f64),

    #[error("{pairs} grid pairs exceed the exact-evaluation limit of {limit}")]
    InfeasibleGrid { pairs: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
