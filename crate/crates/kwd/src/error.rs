use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shape mismatch: {rows}x{cols} incompatible with {expected}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid kernel parameter: {0}")]
    InvalidKernel(String),

    #[error("kernel specs differ between operands")]
    KernelMismatch,

    #[error("matrix not symmetric: max deviation {deviation:.3e} exceeds tolerance")]
    NotSymmetric { deviation: f64 },

    #[error("matrix not positive semi-definite: eigenvalue {eigenvalue:.3e}")]
    NotPsd { eigenvalue: f64 },

    #[error("singular covariance: {0}")]
    SingularCovariance(&'static str),

    #[error("invalid probability vector: {0}")]
    InvalidWeights(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("negative value {value:.3e} beyond tolerance in {context}")]
    NegativeBeyondTolerance { value: f64, context: &'static str },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("problem too large for enumeration: {n0}x{n1} (limit 3x3)")]
    EnumerationTooLarge { n0: usize, n1: usize },

    #[error("label {label} has no points")]
    EmptyGroup { label: usize },

    #[error("spectral decomposition failed: {0}")]
    DecompositionFailed(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
