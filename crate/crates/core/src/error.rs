use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },

    #[error("matrix exponential leaves the floating-point range (eigenvalue {eigenvalue})")]
    Overflow { eigenvalue: f64 },

    #[error("reflections are not supported (determinant {determinant})")]
    ReflectionNotSupported { determinant: f64 },

    #[error("unsupported dimension {dim} for {context}")]
    UnsupportedDimension { dim: usize, context: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("input set is empty")]
    EmptyInput,

    #[error(
        "Karcher mean did not converge after {iterations} iterations \
         (gradient norm {gradient_norm:e}, objective {objective:e})"
    )]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
        objective: f64,
    },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("composited canvas is empty")]
    EmptyCanvas,

    #[error("no pixel buffer for image '{0}'")]
    MissingPixels(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
