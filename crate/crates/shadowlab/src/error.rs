use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not special orthogonal: {0}")]
    NotSpecialOrthogonal(String),
    #[error("invalid spin quantum numbers: {0}")]
    InvalidSpin(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("subgroup elements do not commute (deviation {0:.3e})")]
    NonCommuting(f64),
    #[error("basis is not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("character average {value:.4} is not close to an integer")]
    Residual { value: f64 },
    #[error("ensemble `{0}` has no finite enumeration at this size")]
    NoEnumerator(String),
    #[error("dimension {0} too large for a dense superoperator")]
    TooLarge(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("non-central twirl on `{label}`: residual {residual:.3e} above {threshold:.3e}")]
    NonCentral { label: String, residual: f64, threshold: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
