use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("mass must be positive and finite, got {0}")]
    NonPositiveMass(f64),
}

/// Problems building a world from a configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
    #[error("arena {width}x{height} cannot fit {what} without overlap")]
    ArenaTooSmall {
        width: f64,
        height: f64,
        what: &'static str,
    },
}

/// Inputs rejected by the tick pipeline before any mutation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("control references unknown player {0}")]
    UnknownPlayer(usize),
    #[error("player {0} received more than one control this tick")]
    DuplicateControl(usize),
    #[error("player {0} has no control this tick")]
    MissingControl(usize),
    #[error("player {0} has no living cells")]
    DeadPlayer(usize),
    #[error("cursor for player {0} is not finite")]
    NonFiniteCursor(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    Unknown(String),
    #[error("failed to parse scenario file: {0}")]
    Parse(String),
    #[error("unsupported scenario schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("scenario `{name}`: {reason}")]
    Invalid { name: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("protocol error: {0}")]
    Protocol(&'static str),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Step(#[from] StepError),
}
