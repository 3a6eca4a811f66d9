//! Starting point from the SOCP relaxation.

use l1gn::gn::{Omega, OmegaBlock, OmegaKind};
use l1gn::linalg::CscMatrix;
use l1gn::subsolver::{AdmmSettings, AdmmSolver, ConicProgram, RhoPolicy};
use serde::{Deserialize, Serialize};

use crate::error::OpfError;
use crate::formulation::{CsThetaPoint, OpfProblem};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SocpInit {
    pub point: CsThetaPoint,
    /// Relaxation optimum in the optimization units (objective divided by
    /// the cost scale, no constant term).
    pub lower_bound: f64,
    /// Relaxation optimum in $/h, constant terms included.
    pub relaxation_cost: f64,
    pub socp_iters: usize,
    pub theta_iters: usize,
    /// Residual of the θ⁰ fit, `Σ((θ_i − θ_j) − arctan(−s_ij/c_ij))²`.
    pub theta_fit: f64,
    /// Scalar part of the dual of each branch's relaxed quadratic
    /// constraint, in the optimization units.
    pub cone_duals: Vec<f64>,
}

pub fn socp_admm() -> AdmmSettings {
    AdmmSettings {
        eps_abs: 1e-9,
        eps_rel: 1e-9,
        max_iter: 400_000,
        rho_policy: RhoPolicy::Adaptive { interval: 50, factor: 5.0 },
        ..AdmmSettings::default()
    }
}

/// Solves the SOCP relaxation over `(p, q, c, s)` (the quadratic residual
/// relaxed to `c_ij² + s_ij² ≤ c_ii c_jj`), then fits θ.
pub fn socp_init(problem: &OpfProblem) -> Result<SocpInit, OpfError> {
    socp_init_with(problem, &socp_admm())
}

pub fn socp_init_with(problem: &OpfProblem, settings: &AdmmSettings) -> Result<SocpInit, OpfError> {
    let ix = problem.ix;
    let n = ix.dim() - ix.nb;
    let mut om = problem.omega_without_theta(None);
    om.dim = n;
    for (l, &(f, t)) in problem.ends.iter().enumerate() {
        om.push(OmegaBlock {
            coeffs: vec![
                (0, ix.cii(f), 1.0),
                (0, ix.cii(t), 1.0),
                (1, ix.c(l), 2.0),
                (2, ix.s(l), 2.0),
                (3, ix.cii(f), 1.0),
                (3, ix.cii(t), -1.0),
            ],
            kind: OmegaKind::SecondOrder { offset: vec![0.0; 4] },
            tag: None,
        });
    }
    let obj = l1gn::gn::NonconvexProblem::objective(problem);
    let prog = program(&om, &obj.hess_diag[..n], obj.linear[..n].to_vec())?;
    let mut solver = AdmmSolver::new(settings.clone());
    let out = match solver.solve(&prog, None) {
        Ok(o) => o,
        Err(fail) => {
            let detail = match &fail.best {
                Some(b) => format!("primal residual {:.3e} after {} iterations", b.primal_residual, b.iters),
                None => fail.error.to_string(),
            };
            return Err(OpfError::Infeasible(detail));
        }
    };
    let m = prog.m();
    let cone_duals = (0..ix.nl).map(|l| out.y[m - 4 * ix.nl + 4 * l].abs()).collect();
    let mut x = out.x.clone();
    x.extend(std::iter::repeat_n(0.0, ix.nb));
    let mut pt = problem.point(&x);
    let (theta, theta_iters, theta_fit) = fit_angles(problem, &pt)?;
    pt.theta = theta;
    let lower_bound = prog.smooth_objective(&out.x);
    Ok(SocpInit {
        relaxation_cost: problem.cost(&pt),
        point: pt,
        lower_bound,
        socp_iters: out.iters,
        theta_iters,
        theta_fit,
        cone_duals,
    })
}

fn program(om: &Omega<f64>, hess: &[f64], linear: Vec<f64>) -> Result<ConicProgram<f64>, OpfError> {
    let (a, kinds) = om.to_rows()?;
    Ok(ConicProgram::new(CscMatrix::diagonal(hess), linear, 0.0, a, kinds)?)
}

/// Least-squares fit of θ to the angles implied by `(c, s)`, within the
/// angle-difference limits and with the reference angle at 0.
pub fn fit_angles(problem: &OpfProblem, pt: &CsThetaPoint) -> Result<(Vec<f64>, usize, f64), OpfError> {
    let ix = problem.ix;
    let nb = ix.nb;
    let mut p_trip = Vec::new();
    let mut q = vec![0.0; nb];
    let mut constant = 0.0;
    for (l, &(f, t)) in problem.ends.iter().enumerate() {
        if pt.c[l].abs() < 1e-9 {
            continue;
        }
        let phi = (-pt.s[l] / pt.c[l]).atan();
        let (a, b) = (f.min(t), f.max(t));
        p_trip.push((f, f, 2.0));
        p_trip.push((t, t, 2.0));
        p_trip.push((a, b, -2.0));
        q[f] -= 2.0 * phi;
        q[t] += 2.0 * phi;
        constant += phi * phi;
    }
    let base = ix.theta(0);
    let mut om = Omega::new(nb);
    for block in problem.theta_blocks() {
        let coeffs = block.coeffs.iter().map(|&(r, c, v)| (r, c - base, v)).collect();
        om.push(OmegaBlock { coeffs, ..block });
    }
    let (a, kinds) = om.to_rows()?;
    let prog = ConicProgram::new(CscMatrix::from_triplets(nb, nb, &p_trip), q, constant, a, kinds)?;
    let settings = AdmmSettings { eps_abs: 1e-10, eps_rel: 1e-10, max_iter: 200_000, ..AdmmSettings::default() };
    let out = AdmmSolver::new(settings).solve(&prog, None).map_err(|f| OpfError::Core(f.error))?;
    let fit = prog.smooth_objective(&out.x).max(0.0);
    Ok((out.x, out.iters, fit))
}
