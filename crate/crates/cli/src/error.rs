use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(#[from] tnlab::Error),
    #[error("{path}: {source}")]
    Input { path: String, source: tnlab::Error },
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 1 for usage errors, 2 for bad data.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}
