use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, malformed scenario, invalid parameters.
    #[error("{0}")]
    Usage(String),
    /// A computation that the whole run depends on failed.
    #[error("{0}")]
    Computation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Computation(_) | CliError::Io(_) => 3,
        }
    }
}
