//! Convex subproblem engine: conic program representation, proximal kernels
//! and the warm-startable splitting solver.

pub mod admm;
pub mod cones;
pub mod dump;
pub mod program;
pub mod scaling;

pub use admm::{
    admm_solve, AdmmFailure, AdmmOutput, AdmmSettings, AdmmSolver, AdmmStats, AdmmStatus, RhoPolicy, SplitState,
};
pub use program::{ConicProgram, RowBlock, RowKind};
