use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Driver errors, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(sabi_core::Error),

    #[error("acceptance failure: {0}")]
    Acceptance(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }
}

impl From<sabi_core::Error> for CliError {
    fn from(e: sabi_core::Error) -> Self {
        match e {
            sabi_core::Error::Io(e) => CliError::Io(e.to_string()),
            sabi_core::Error::Json(e) => CliError::Io(e.to_string()),
            e => CliError::Numerical(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
