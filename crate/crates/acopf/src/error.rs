use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid network: {0}")]
    Model(String),
    #[error("case infeasible even relaxed: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] l1gn::Error),
}

impl OpfError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        OpfError::Parse { line, message: message.into() }
    }
}
