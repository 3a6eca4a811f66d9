//! Gauss-Newton method for nonconvex programs with an exact ℓ1 penalty.
//!
//! A problem is `min f(x)` over a convex set `Ω` subject to `Ψ(x) = 0`, with
//! `f` a convex separable quadratic. Each outer iteration linearizes `Ψ`
//! inside the penalty `f + Σ β_c ‖Ψ_c‖₁`, adds a proximal term and solves
//! the resulting strongly convex program with a conic ADMM engine.
//!
//! The kernels are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the problem frontends use.

mod error;
pub mod gn;
pub mod linalg;
mod scalar;
pub mod subsolver;

pub use error::Error;
pub use scalar::Scalar;

pub type Csc = linalg::CscMatrix<f64>;
pub type Program = subsolver::ConicProgram<f64>;
pub type Split = subsolver::SplitState<f64>;
pub type Omega = gn::Omega<f64>;
pub type Weights = gn::PenaltyWeights<f64>;
pub type Reg = gn::RegParams<f64>;
pub type Report = gn::SolveReport<f64>;
pub type Config = gn::GnConfig<f64>;
