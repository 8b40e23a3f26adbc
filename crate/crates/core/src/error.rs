use thiserror::Error;

pub type Result<T, E = CcrError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CcrError {
    #[error("matrix is not Hermitian (max |m - m^dagger| = {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("subsystem index {index} out of range for {count} subsystems")]
    BadIndex { index: usize, count: usize },
    #[error("invalid bipartition: {0}")]
    BadCut(String),
    #[error("weights and conditional states disagree: {0}")]
    WeightMismatch(String),
    #[error("operation requires a single qubit, got dimension {0}")]
    NotQubit(usize),
    #[error("operation requires a two-qubit state, got dims {0:?}")]
    NotTwoQubit(Vec<usize>),
    #[error("dimension {dim} exceeds the supported limit {limit}")]
    DimTooLarge { dim: usize, limit: usize },
    #[error("state is not pure (purity {purity})")]
    NotPure { purity: f64 },
    #[error("state vector is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("not a valid measurement basis: {0}")]
    BadBasis(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("time grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("trajectory has no record named `{0}`")]
    MissingKey(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CcrError {
    fn from(e: std::io::Error) -> Self {
        CcrError::Io(e.to_string())
    }
}
