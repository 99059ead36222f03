use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("decode error at byte {offset}: {message}")]
    Decode { offset: usize, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("weight degeneracy: all particle weights are zero or non-finite")]
    Degenerate,

    #[error("initialization expected {expected} target(s) but detected {found}")]
    InitCount { expected: usize, found: usize },

    #[error("unknown scenario `{name}`; valid scenarios: {}", valid.join(", "))]
    UnknownScenario { name: String, valid: Vec<String> },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("frame count mismatch: trajectories have {trajectories} frames, truth has {truth}")]
    FrameMismatch { trajectories: usize, truth: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn decode(offset: usize, message: impl Into<String>) -> Self {
        Error::Decode {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
