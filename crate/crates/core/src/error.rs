use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have dimension at least 1")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not Hermitian: entry ({row}, {col}) deviates from its adjoint by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("trace is not 1 (got {re} + {im}i)")]
    InvalidTrace { re: f64, im: f64 },

    #[error("not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("{name} is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    Singular { name: String, min_eigenvalue: f64 },

    #[error("eigenvalue {eigenvalue:e} outside the domain of {function}")]
    Domain { function: &'static str, eigenvalue: f64 },

    #[error("Hermitian eigensolver did not converge (dimension {dim})")]
    EigenNonConvergence { dim: usize },

    #[error("singular value decomposition did not converge (dimension {dim})")]
    SvdNonConvergence { dim: usize },

    #[error("relative entropy is infinite (support condition violated)")]
    InfiniteEntropy,

    #[error("imaginary residue {residue:e} exceeds tolerance in {quantity}")]
    ImaginaryResidue { quantity: &'static str, residue: f64 },

    #[error("not a channel: Kraus completeness defect {defect:e}")]
    NotTracePreserving { defect: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
