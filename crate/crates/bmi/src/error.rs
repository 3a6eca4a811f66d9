use thiserror::Error;

#[derive(Debug, Error)]
pub enum BmiError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid instance: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] l1gn::Error),
}
