//! End-to-end solve of a case: relaxation, Gauss-Newton, polar check.

use l1gn::gn::{gn_solve, GnConfig, SolveReport, Status};

use crate::case::NetworkModel;
use crate::error::OpfError;
use crate::formulation::{active_line_set, build_problem, OpfProblem};
use crate::init::{socp_init, SocpInit};
use crate::polar::{recover_polar, PolarReport};
use crate::tuning::{relaxation_cost_scale, Tuning};

#[derive(Clone, Debug)]
pub struct OpfRun {
    pub problem: OpfProblem,
    pub init: SocpInit,
    pub config: GnConfig<f64>,
    pub report: SolveReport<f64>,
    pub polar: PolarReport,
    /// Generation cost at the returned point, $/h.
    pub cost: f64,
}

impl OpfRun {
    pub fn converged(&self) -> bool {
        self.report.status == Status::Converged
    }
}

/// `model` must have its admittance built.
pub fn solve_case(model: &NetworkModel, tuning: &Tuning) -> Result<OpfRun, OpfError> {
    solve_case_with(model, tuning, |_| {})
}

/// As [`solve_case`], letting the caller adjust the solver configuration.
pub fn solve_case_with(
    model: &NetworkModel,
    tuning: &Tuning,
    adjust: impl FnOnce(&mut GnConfig<f64>),
) -> Result<OpfRun, OpfError> {
    let (problem, init) = prepare(model, tuning)?;
    let mut config = tuning.gn_config()?;
    adjust(&mut config);
    finish(problem, init, config)
}

/// Problem and relaxation start, with the cost scale and lazy line set
/// applied.
pub fn prepare(model: &NetworkModel, tuning: &Tuning) -> Result<(OpfProblem, SocpInit), OpfError> {
    let mut problem = build_problem(model, tuning)?;
    let mut init = socp_init(&problem)?;
    if tuning.cost_scale.is_none() {
        let scale = relaxation_cost_scale(&init.cone_duals, tuning);
        problem = problem.with_cost_scale(scale);
        init.lower_bound /= scale;
        init.cone_duals.iter_mut().for_each(|d| *d /= scale);
    }
    if problem.is_lazy() {
        let lines = active_line_set(&problem, &init.point, tuning.lazy_margin);
        problem = problem.with_lines(lines);
    }
    Ok((problem, init))
}

/// Runs Gauss-Newton from the relaxation start and checks the polar point.
pub fn finish(problem: OpfProblem, init: SocpInit, config: GnConfig<f64>) -> Result<OpfRun, OpfError> {
    let report = gn_solve(&problem, &config, &init.point.to_vec())?;
    let pt = problem.point(&report.x);
    let polar = recover_polar(&pt, &problem.model)?;
    let cost = problem.cost(&pt);
    Ok(OpfRun { problem, init, config, report, polar, cost })
}
