use thiserror::Error;

/// Broad failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    Config,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: cannot parse column `{column}`")]
    RowParse { line: u64, column: String },
    #[error("line {line}: value {value} out of range for column `{column}`")]
    RangeViolation {
        line: u64,
        column: String,
        value: String,
    },
    #[error("split of {n} records at test fraction {test_fraction} leaves one side empty")]
    DegenerateSplit { n: usize, test_fraction: f64 },
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("only one class present")]
    SingleClass,
    #[error("dataset has no strategy labels")]
    MissingLabels,
    #[error("need at least {needed} records, got {n}")]
    InsufficientData { n: usize, needed: usize },
    #[error("dimension mismatch: expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("singular design matrix")]
    SingularDesign,
    #[error("k = {k} exceeds the {n} stored samples")]
    KTooLarge { k: usize, n: usize },
    #[error("fold count {k} out of range for {n} samples")]
    KOutOfRange { k: usize, n: usize },
    #[error("forest has no impurity decrease (all trees are single leaves)")]
    DegenerateForest,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Io(_) => ErrorKind::Io,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
