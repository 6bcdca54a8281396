use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed JSON: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    /// A structurally valid document whose contents break an invariant.
    #[error("{location}: {message}")]
    Schema { location: String, message: String },

    #[error("series too short: need more than {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("too few frames: need at least {needed}, got {got}")]
    TooFewFrames { needed: usize, got: usize },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("joint `{0}` not found in source motion")]
    MissingJoint(String),

    #[error("robot body `{0}` not found")]
    MissingBody(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("zero-length bone between `{from}` and `{to}` at frame {frame}")]
    ZeroLengthBone { from: String, to: String, frame: usize },

    #[error("body index {index} out of range ({count} bodies)")]
    BodyOutOfRange { index: usize, count: usize },

    #[error("motion has no contact markers")]
    NoMarkers,

    #[error("non-finite loss at iteration {iteration} in term `{term}`")]
    NonFiniteLoss { iteration: usize, term: &'static str },

    #[error("infeasible limits on joint `{joint}`: q_min {q_min} >= q_max {q_max}")]
    InfeasibleLimits { joint: String, q_min: f64, q_max: f64 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
