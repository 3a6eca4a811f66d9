use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error(
        "subsolver did not converge in {iters} iterations (primal residual {primal:.3e}, dual residual {dual:.3e})"
    )]
    SubsolverNonConvergence { iters: usize, primal: f64, dual: f64 },
    #[error("line search failed: L reached {l:.3e} above the cap {cap:.3e} without acceptance")]
    LineSearch { l: f64, cap: f64 },
}
