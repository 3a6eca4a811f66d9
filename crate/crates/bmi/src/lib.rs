//! Spectral-abscissa problem with a bilinear matrix inequality, solved by
//! the `l1gn` Gauss-Newton penalty method.
//!
//! Maximizes the decay rate `t` over output feedback `F` and a Lyapunov
//! matrix `P`, with a slack `S ⪰ 0` turning the inequality into the residual
//! `(A + BFC)ᵀP + P(A + BFC) + 2tP + S = 0`.

pub mod error;
pub mod instance;
pub mod problem;
pub mod run;
pub mod verify;

pub use error::BmiError;
pub use instance::{bundled_instance, BmiInstance, Matrix};
pub use problem::{build_bmi_problem, spectral_start, BmiIndex, BmiPoint, BmiProblem, BmiSettings};
pub use run::{solve_bmi, solve_bmi_with, BmiRun, BmiTuning};
pub use verify::{verify_bmi_solution, BmiVerification};
