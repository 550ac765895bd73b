use thiserror::Error;

/// Errors raised by the simulator, the learning engine and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unknown or inactive slice {0}")]
    UnknownSlice(usize),
    #[error("value outside domain: {0}")]
    Domain(String),
    #[error("request is unservable: allocation below the minimum on a used resource")]
    Unservable,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid agent count: {0}")]
    Count(String),
    #[error("checkpoint does not match configuration: {0}")]
    CheckpointMismatch(String),
    #[error("summaries come from different scenarios: {0}")]
    MismatchedScenario(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable upper-case category name, printed by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::ShapeMismatch(_) => "SHAPE_MISMATCH",
            Error::UnknownSlice(_) => "UNKNOWN_SLICE",
            Error::Domain(_) => "DOMAIN",
            Error::Unservable => "UNSERVABLE",
            Error::Config(_) => "CONFIG",
            Error::Count(_) => "COUNT",
            Error::CheckpointMismatch(_) => "CHECKPOINT_MISMATCH",
            Error::MismatchedScenario(_) => "MISMATCHED_SCENARIO",
            Error::Io(_) | Error::Csv(_) => "IO",
            Error::Json(_) => "FORMAT",
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io(_) | Error::Csv(_) => 3,
            Error::CheckpointMismatch(_) => 4,
            Error::Count(_) => 5,
            Error::MismatchedScenario(_) => 6,
            Error::Json(_) => 7,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
