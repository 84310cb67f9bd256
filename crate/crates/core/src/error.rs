use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A controller denominator vanished (e.g. a center-of-mass offset of 0).
    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    /// An operation was called outside its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no path found after {iterations} iterations")]
    PlanningFailure { iterations: usize },

    #[error("formation {formation}: {source}")]
    FormationPlanning {
        formation: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("validation failed for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("unknown keys in scenario: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("malformed scenario: {0}")]
    Parse(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Write(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors raised while checking a scenario (bad values, unknown
    /// keys, unparsable documents).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::UnknownKeys(_)
                | Error::Parse(_)
                | Error::InvalidInput(_)
                | Error::Precondition(_)
        )
    }

    /// True when a path could not be planned.
    pub fn is_planning_failure(&self) -> bool {
        match self {
            Error::PlanningFailure { .. } => true,
            Error::FormationPlanning { source, .. } => source.is_planning_failure(),
            _ => false,
        }
    }
}
