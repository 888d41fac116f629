use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate register label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown register label `{0}` for this layout")]
    UnknownLabel(String),
    #[error("layout mismatch: expected {expected}, got {got}")]
    LayoutMismatch { expected: String, got: String },
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("relabeling is not a bijection on the label set")]
    NonBijectiveRelabeling,
    #[error("expected {expected} registers, got {got}")]
    WrongRegisterCount { expected: usize, got: usize },
    #[error("invalid pair `{0}`: expected one of 12, 23, 31")]
    InvalidPair(String),
    #[error("matrix document is malformed: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
