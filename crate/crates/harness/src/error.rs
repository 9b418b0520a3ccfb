use std::path::PathBuf;

use agarcl_core::{EnvError, ScenarioError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("io: {0}")]
    Stream(#[from] std::io::Error),
    #[error("bad trajectory: {0}")]
    Format(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("session: {0}")]
    Session(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
