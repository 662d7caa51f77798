use std::fmt;

/// Failures that end a run, each with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or preset.
    Config(String),
    /// Precision ceiling, symbol window or iteration budget exhausted.
    Resource(String),
    Io(String),
}

impl CliError {
    pub fn from_core(e: orbdist_core::Error) -> Self {
        if e.is_resource_exhaustion() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Resource(m) => write!(f, "resource exhausted: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<orbdist_core::Error> for CliError {
    fn from(e: orbdist_core::Error) -> Self {
        CliError::from_core(e)
    }
}
