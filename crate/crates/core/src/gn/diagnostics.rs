//! Checks of the convergence theory on computed runs.

use crate::gn::params::PenaltyWeights;
use crate::gn::penalty::{gradient_mapping, penalty_value};
use crate::gn::problem::{NonconvexProblem, Omega};
use crate::gn::subproblem::{solve_subproblem, Linearization, SubSolution, Warm};
use crate::linalg::vecops;
use crate::subsolver::{AdmmSettings, AdmmSolver};
use crate::{Error, Scalar};

/// Gradient mapping at `x` for per-slice weights `l`, with the subproblem
/// solution it came from.
#[derive(Clone, Debug)]
pub struct MappingAt<T> {
    pub g: Vec<T>,
    pub d: Vec<T>,
    pub r: T,
    pub g_norm: T,
    pub sub: SubSolution<T>,
}

pub fn gradient_mapping_at<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    omega: &Omega<T>,
    x: &[T],
    w: &PenaltyWeights<T>,
    l: &[T],
    solver: &mut AdmmSolver,
) -> Result<MappingAt<T>, Error> {
    let lin = Linearization::at(p, x);
    let l_var = p.layout().expand(l);
    let sub = solve_subproblem(solver, p, omega, &lin, w, &l_var, Warm::Cold)?;
    if !sub.converged {
        return Err(Error::SubsolverNonConvergence {
            iters: sub.inner_iters,
            primal: sub.primal_residual,
            dual: sub.dual_residual,
        });
    }
    let (g, d, r) = gradient_mapping(x, &sub.v, &l_var);
    let g_norm = vecops::norm2(&g);
    Ok(MappingAt { g, d, r, g_norm, sub })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateBoundReport {
    /// `‖G_{βL_Ψ}(x^k)‖²` for every iterate.
    pub g_sq: Vec<f64>,
    /// Right-hand side of the bound for each prefix `0..=K`.
    pub bound: Vec<f64>,
    /// `bound − min_{k≤K} ‖G‖²` per prefix.
    pub margins: Vec<f64>,
    pub holds: bool,
}

/// Evaluates `min_{0≤k≤K} ‖G_{βL_Ψ}(x^k)‖² ≤ 2(βL_Ψ)²[F(x⁰) − F_lower] / (L_min(K+1))`
/// for every prefix of `iterates` (which must share one set of weights, i.e.
/// belong to a single restart segment). The gradient mapping is recomputed
/// at each iterate with the uniform weight `β·L_Ψ`.
#[allow(clippy::too_many_arguments)]
pub fn rate_bound_check<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    omega: &Omega<T>,
    iterates: &[Vec<T>],
    w: &PenaltyWeights<T>,
    l_min: f64,
    f_lower: f64,
    settings: &AdmmSettings,
) -> Result<RateBoundReport, Error> {
    let lpsi = p.lipschitz().ok_or_else(|| Error::Invalid("rate bound needs a Lipschitz constant".into()))?;
    let big_l = (w.max() * lpsi).f64();
    let f0 = penalty_value(p, &iterates[0], w)?.f64();
    let l_uniform = vec![T::of(big_l); p.layout().slices().len()];
    let mut solver = AdmmSolver::new(settings.clone());
    let mut g_sq = Vec::with_capacity(iterates.len());
    for x in iterates {
        let m = gradient_mapping_at(p, omega, x, w, &l_uniform, &mut solver)?;
        g_sq.push(m.g_norm.f64().powi(2));
    }
    let mut bound = Vec::with_capacity(g_sq.len());
    let mut margins = Vec::with_capacity(g_sq.len());
    let mut best = f64::INFINITY;
    for (k, &g) in g_sq.iter().enumerate() {
        best = best.min(g);
        let b = 2.0 * big_l * big_l * (f0 - f_lower) / (l_min * (k as f64 + 1.0));
        bound.push(b);
        margins.push(b - best);
    }
    let holds = margins.iter().all(|&m| m >= -1e-9 * (1.0 + bound.last().copied().unwrap_or(0.0).abs()));
    Ok(RateBoundReport { g_sq, bound, margins, holds })
}

/// `‖x^{k+1} − x*‖ / ‖x^k − x*‖²` along a run, with `x*` the last iterate.
/// Purely descriptive.
pub fn local_rate_ratios<T: Scalar>(iterates: &[Vec<T>]) -> Vec<f64> {
    let Some(last) = iterates.last() else { return Vec::new() };
    let err: Vec<f64> = iterates.iter().map(|x| vecops::norm2(&vecops::sub(x, last)).f64()).collect();
    err.windows(2).filter(|e| e[0] > 0.0 && e[1] > 0.0).map(|e| e[1] / (e[0] * e[0])).collect()
}
