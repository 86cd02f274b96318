use thiserror::Error;

/// Failures of a CLI run, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unresolved reference: {0}")]
    Unresolved(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Exit codes, also used for outcomes that are not errors.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const SYNTAX: i32 = 10;
    pub const UNRESOLVED: i32 = 11;
    pub const INVARIANT: i32 = 12;
    pub const STUCK: i32 = 13;
    pub const VERIFICATION: i32 = 14;
    pub const IO: i32 = 15;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Syntax(_) => exit::SYNTAX,
            CliError::Unresolved(_) => exit::UNRESOLVED,
            CliError::Invariant(_) => exit::INVARIANT,
            CliError::Io(_) => exit::IO,
        }
    }
}
