use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    /// A factorization met an eigenvalue (or pivot) at or below the floor.
    /// `index` is the position in the descending spectrum.
    #[error("matrix is numerically singular: eigenvalue #{index} = {value:e} (floor {floor:e}, condition number {condition:e})")]
    Singular {
        index: usize,
        value: f64,
        floor: f64,
        condition: f64,
    },

    #[error("condition number is undefined for the zero matrix")]
    UndefinedCondition,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("rank deficient: expected rank {expected}, found {found}")]
    Rank { expected: usize, found: usize },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid weight matrix: {0}")]
    InvalidWeight(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: duplicate date {date} (line {line})")]
    DuplicateDate {
        path: PathBuf,
        date: String,
        line: usize,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
