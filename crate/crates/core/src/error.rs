use std::path::PathBuf;

use thiserror::Error;

use crate::relation::ExternalId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no records")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("closure did not reach a fixed point within {iterations} compositions")]
    NonConvergence { iterations: usize },

    #[error(
        "closed graph is not a closure of the direct graph at ({i}, {j}): {closed} > {direct}"
    )]
    InconsistentClosure {
        i: ExternalId,
        j: ExternalId,
        direct: f64,
        closed: f64,
    },

    #[error("user {0} has an empty training profile")]
    EmptyProfile(ExternalId),

    #[error("unknown user {0}")]
    UnknownUser(ExternalId),

    #[error("no users with a usable test set")]
    NoIncludedUsers,

    #[error("algebra violates the proximity/distance commuting equations: {0}")]
    Algebra(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Compute,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) | Error::Algebra(_) => ErrorClass::Usage,
            Error::Parse { .. }
            | Error::EmptyInput
            | Error::Io { .. }
            | Error::UnknownUser(_)
            | Error::EmptyProfile(_)
            | Error::NoIncludedUsers => ErrorClass::Data,
            Error::NonConvergence { .. } | Error::InconsistentClosure { .. } => ErrorClass::Compute,
            Error::Stage { source, .. } => source.class(),
        }
    }
}
