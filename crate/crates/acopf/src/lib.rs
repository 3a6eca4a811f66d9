//! AC optimal power flow on top of the `l1gn` Gauss-Newton solver.
//!
//! A MATPOWER case is parsed into a [`NetworkModel`], rewritten in the
//! variables `(p, q, c, s, θ)` where every constraint except two residual
//! classes per branch is convex, started from the SOCP relaxation and solved
//! with [`l1gn::gn::gn_solve`].

pub mod admittance;
pub mod bench;
pub mod case;
pub mod error;
pub mod formulation;
pub mod init;
pub mod polar;
pub mod run;
pub mod tuning;

pub use admittance::{build_admittance, Admittance, BranchAdmittance};
pub use bench::{bench_warmstart, WarmstartBench};
pub use case::{parse_matpower, write_matpower, Branch, Bus, BusType, Cost, Gen, NetworkModel};
pub use error::OpfError;
pub use formulation::{
    active_line_set, branch_flows, build_problem, eval_quadratic_residual, eval_trig_residual, jacobians,
    lipschitz_bound, CsThetaPoint, OpfProblem, VarIndex,
};
pub use init::{socp_init, SocpInit};
pub use polar::{recover_polar, solution, OpfSolution, PolarReport};
pub use run::{finish, prepare, solve_case, solve_case_with, OpfRun};
pub use tuning::{default_tuning, relaxation_cost_scale, Tuning};

/// Reads a case file and builds its admittances.
pub fn load_case(path: &std::path::Path) -> Result<NetworkModel, OpfError> {
    let text = std::fs::read_to_string(path).map_err(|e| OpfError::Io(format!("{}: {e}", path.display())))?;
    build_admittance(parse_matpower(&text)?)
}
