use std::path::PathBuf;

/// Failures of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: exit code 2.
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// A computation or IO step failed on valid input: exit code 1.
    #[error("{0}")]
    Computation(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Computation(_) | CliError::Io { .. } => 1,
        }
    }
}

impl From<coding_game_core::Error> for CliError {
    fn from(e: coding_game_core::Error) -> Self {
        CliError::Computation(e.to_string())
    }
}

/// Re-labels a core error raised while checking input as a validation error
/// of `field`.
pub(crate) fn in_field(field: &str) -> impl Fn(coding_game_core::Error) -> CliError + '_ {
    move |e| CliError::invalid(field, e.to_string())
}

pub type CliResult<T> = Result<T, CliError>;
