//! Outer Gauss-Newton loop on the exact ℓ1 penalty.

pub mod diagnostics;
pub mod linesearch;
pub mod params;
pub mod penalty;
pub mod problem;
pub mod solver;
pub mod subproblem;
pub mod trace;

pub use diagnostics::{gradient_mapping_at, local_rate_ratios, rate_bound_check, RateBoundReport};
pub use linesearch::{line_search_l, Acceptance, AcceptedBy, LineSearchContext, LineSearchOutcome, SplitRule};
pub use params::{PenaltyWeights, RegParams, Strategy};
pub use penalty::{
    class_norms, directional_derivative, gradient_mapping, linearized_residual, model_value, model_value_with,
    penalty_value, weighted_l1,
};
pub use problem::{
    validate_problem, ConstraintClass, NonconvexProblem, Omega, OmegaBlock, OmegaKind, QuadObjective, VarSlice,
    VariableLayout,
};
pub use solver::{
    check_stopping, gn_solve, project_onto_omega, run_and_inspect, GnConfig, IterateState, SolveReport, Status,
    StopDecision,
};
pub use subproblem::{assemble, solve_subproblem, Linearization, SubSolution, Warm};
pub use trace::{write_trace_csv, TraceRow};
