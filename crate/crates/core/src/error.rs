use std::path::PathBuf;

/// Errors raised by the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid ICDR grade {0}: expected 0..=4")]
    InvalidGrade(i64),
    #[error("prediction score {score} for {image_id} is outside [0, 1]")]
    ScoreOutOfRange { image_id: String, score: f64 },
    #[error("fundus localisation failed: {0}")]
    LocalizationFailed(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("insufficient {class} pool: {short} images short")]
    InsufficientPool { class: String, short: usize },
    #[error("duplicate image id {0}")]
    DuplicateImage(String),
    #[error("data unavailable: {0}")]
    DataUnavailable(String),
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("AUC is undefined: labels contain only one class")]
    DegenerateLabels,
    #[error("empty input")]
    EmptyInput,
    #[error("image {0} has no label")]
    MissingLabel(String),
    #[error("image {0} is not covered by every ensemble member")]
    MismatchedCoverage(String),
    #[error("ensemble member {index} failed: {source}")]
    EnsembleMember {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
