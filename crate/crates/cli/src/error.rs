use std::fmt;

/// Command-level failures with their process exit codes: usage and input
/// problems exit 2, runtime failures exit 1.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input files, unknown keys, bad headers: exit code 2.
    Input(String),
    /// Failures inside the pipeline (training, IO mid-run): exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<combigcn_core::Error> for CliError {
    fn from(err: combigcn_core::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
