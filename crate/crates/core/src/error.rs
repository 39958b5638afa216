use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |m_ij - conj(m_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("density matrix trace is {trace} (|tr - 1| = {deviation:e})")]
    Trace { trace: f64, deviation: f64 },

    #[error("density matrix has negative eigenvalue {min_eigenvalue:e}")]
    NegativeEigenvalue { min_eigenvalue: f64 },

    #[error("matrix has a negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("invalid network configuration: {0}")]
    Topology(String),

    #[error("parameter vector has length {got}, scheme expects {expected}")]
    ParamLength { expected: usize, got: usize },

    #[error("scheme (b) parameter {index} is {value}, expected 0 or 1")]
    NonBinary { index: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported ensemble: {0}")]
    UnsupportedEnsemble(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("numerical instability after propagation: {source}")]
    NumericalInstability {
        #[source]
        source: Box<Error>,
    },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("malformed JSON document: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
