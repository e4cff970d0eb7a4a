use std::path::PathBuf;

use crate::mcf::FlowError;
use crate::reformulate::Infeasibility;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("infeasible: {0}")]
    Infeasible(Infeasibility),

    #[error(transparent)]
    Flow(#[from] FlowError),

    #[error("enumeration of {count} placements exceeds the limit of {limit}; shrink the instance")]
    EnumerationLimit { count: u128, limit: u128 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}, line {line}: {message}")]
    Parse {
        context: String,
        line: u64,
        message: String,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
