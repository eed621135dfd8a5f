use thiserror::Error;

/// Errors produced by dataset ingestion, simplification, training and
/// evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing required column `{0}` in CSV header")]
    MissingColumn(String),

    #[error("ambiguous column `{0}`: appears more than once in CSV header")]
    DuplicateColumn(String),

    #[error("row {row}, column `{column}`: {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("release has no instances")]
    EmptyRelease,

    #[error("negative metric value {value} at row {row}, metric `{metric}` (pass clamping to force to 0)")]
    NegativeMetric {
        row: usize,
        metric: String,
        value: f64,
    },

    #[error("release {0} is already log-transformed")]
    AlreadyTransformed(String),

    #[error("no candidate releases remain after excluding project `{0}`")]
    NoCandidates(String),

    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("DPR undefined: the test set has no defective instances")]
    UndefinedDpr,

    #[error("AUC undefined: truth labels contain only one class")]
    UndefinedAuc,

    #[error("need at least {required} nonzero paired differences, found {found}")]
    SampleSize { required: usize, found: usize },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
