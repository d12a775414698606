use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("expected square faces, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("numerically singular {context} (condition estimate {condition:e})")]
    Singular { context: String, condition: f64 },

    #[error("eigenvector matrix too ill-conditioned (condition estimate {0:e})")]
    IllConditionedEigenvectors(f64),

    #[error("eigenvalue {value} lies on the branch cut of {function}")]
    BranchCut { function: String, value: String },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("function {0} has no derivative available")]
    NoDerivative(String),

    #[error("{what} needs dimension {size}, above the dense limit {limit}")]
    DenseLimit { what: &'static str, size: usize, limit: usize },

    #[error("subproblem {index}: {source}")]
    Subproblem { index: usize, source: Box<Error> },

    #[error("block Krylov breakdown after {achieved_d} block iterations: {reason}")]
    KrylovBreakdown { achieved_d: usize, reason: String },

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("not differentiable here: eigenvalue ratio {0:e} below guard")]
    NonDifferentiable(f64),

    #[error("zero norm: {0}")]
    ZeroNorm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
