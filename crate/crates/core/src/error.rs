use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension signature: {0}")]
    InvalidSignature(String),
    #[error("signature mismatch: {left:?} vs {right:?}")]
    SignatureMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("operator is not Hermitian")]
    NotHermitian,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid system: {0}")]
    InvalidSpec(String),
    #[error("zero detuning in {0}")]
    Singular(String),
    #[error("unsupported model family: {0}")]
    UnsupportedFamily(String),
    #[error("generator identity violated: relative residual {0:e}")]
    GeneratorIdentity(f64),
    #[error("integration failed at t = {t} ns: {reason}")]
    Integration { t: f64, reason: String },
    #[error("scan failed: {0}")]
    Scan(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
