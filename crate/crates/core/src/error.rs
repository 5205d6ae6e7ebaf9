use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("target state is not normalized (norm {0})")]
    UnnormalizedTarget(f64),

    #[error("post-selection requires a non-empty mode set")]
    EmptyModeSet,

    #[error("coupler splitting error {0} outside (-0.5, 0.5)")]
    SplittingError(f64),

    #[error("unknown circuit configuration `{0}`")]
    UnknownCircuit(String),

    #[error("{name} = {value} is not a probability")]
    Probability { name: &'static str, value: f64 },

    #[error("error weights must be non-negative and sum to 1 (got sum {0})")]
    Weights(f64),

    #[error("visibility {0} outside [0, 1]")]
    Visibility(f64),

    #[error("target fidelity {0} outside [0.25, 1]")]
    TargetFidelity(f64),

    #[error("negative integration time {0} s")]
    NegativeTime(f64),

    #[error("invalid detection parameters: {0}")]
    Detection(String),

    #[error("measurement direction is not a unit vector (norm {0})")]
    Direction(f64),

    #[error("missing measurement setting {0}")]
    MissingSetting(String),

    #[error("measurement setting {0} has zero total counts")]
    ZeroCounts(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
