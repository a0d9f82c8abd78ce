use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("probability mass does not sum to one (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("invalid probability mass {value} at index {index}")]
    InvalidMass { index: usize, value: f64 },

    #[error("objective is not finite at x = {at}")]
    NonFiniteObjective { at: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("curve sets do not match: {0}")]
    CurveMismatch(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by how the tool was invoked rather than by the data it ran on.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::UnknownColumn(_) | Error::CurveMismatch(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
