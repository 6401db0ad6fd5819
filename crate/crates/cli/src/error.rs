use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] seqrev_core::Error),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for invalid input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Model(e) => match e {
                seqrev_core::Error::NotBracketed { .. } | seqrev_core::Error::NoInitialDecision { .. } => 2,
                _ => 1,
            },
            CliError::Numerical(_) => 2,
        }
    }
}
