use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gn::linesearch::{line_search_l, Acceptance, AcceptedBy, LineSearchContext};
use crate::gn::params::{PenaltyWeights, RegParams};
use crate::gn::penalty::{class_norms, gradient_mapping, weighted_l1};
use crate::gn::problem::{validate_problem, NonconvexProblem, Omega};
use crate::gn::subproblem::Linearization;
use crate::gn::trace::TraceRow;
use crate::linalg::{vecops, CscMatrix};
use crate::subsolver::{AdmmSettings, AdmmSolver, AdmmStats, ConicProgram, SplitState};
use crate::{Error, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct GnConfig<T> {
    pub weights: PenaltyWeights<T>,
    pub reg: RegParams<T>,
    pub acceptance: Acceptance,
    pub tol_feas: f64,
    pub tol_step: f64,
    /// Also require the last step to be shorter than `tol_step` before
    /// declaring convergence (feasibility alone stops by default).
    pub require_stationarity: bool,
    pub max_iter: usize,
    pub restart_cap: usize,
    /// Relative radius of the uniform restart perturbation (0 disables it).
    pub perturb_scale: f64,
    pub seed: u64,
    pub admm: AdmmSettings,
    pub warm_start: bool,
    pub l_cap_factor: f64,
    /// Lazy separation rounds allowed per outer iteration.
    pub lazy_rounds: usize,
    pub accept_inexact: bool,
    pub record_iterates: bool,
    pub record_timing: bool,
    /// Per outer iteration, the sequence of trial `L` values to replay.
    pub replay: Option<Vec<Vec<Vec<T>>>>,
}

impl<T: Scalar> GnConfig<T> {
    pub fn new(weights: PenaltyWeights<T>, reg: RegParams<T>) -> Self {
        GnConfig {
            weights,
            reg,
            acceptance: Acceptance::default(),
            tol_feas: 1e-5,
            tol_step: 1e-6,
            require_stationarity: false,
            max_iter: 100,
            restart_cap: 5,
            perturb_scale: 1e-3,
            seed: 0,
            admm: AdmmSettings::default(),
            warm_start: true,
            l_cap_factor: 1e3,
            lazy_rounds: 20,
            accept_inexact: false,
            record_iterates: false,
            record_timing: false,
            replay: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    Stalled,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::MaxIterations => "MaxIterations",
            Status::Stalled => "Stalled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Converged,
    Stalled,
    MaxIterations,
}

/// Current iterate and everything derived from it.
#[derive(Clone, Debug)]
pub struct IterateState<T> {
    pub x: Vec<T>,
    pub k: usize,
    pub penalty: T,
    pub objective: T,
    pub psi: Vec<T>,
    pub psi_l1: Vec<T>,
    pub psi_inf: Vec<T>,
    pub g_norm: T,
    pub step_norm: T,
    /// ∞-norm of the last step, `None` before the first one.
    pub last_step_inf: Option<T>,
    pub warm: Option<SplitState<T>>,
    pub restarts: usize,
}

impl<T: Scalar> IterateState<T> {
    pub fn new<P: NonconvexProblem<T> + ?Sized>(p: &P, x: Vec<T>, w: &PenaltyWeights<T>) -> Self {
        let psi = p.residual(&x);
        let objective = p.objective().value(&x);
        let penalty = objective + weighted_l1(p.classes(), w, &psi);
        let (psi_l1, psi_inf) = class_norms(p.classes(), &psi);
        IterateState {
            x,
            k: 0,
            penalty,
            objective,
            psi,
            psi_l1,
            psi_inf,
            g_norm: T::zero(),
            step_norm: T::zero(),
            last_step_inf: None,
            warm: None,
            restarts: 0,
        }
    }

    pub fn max_violation(&self) -> T {
        self.psi_inf.iter().fold(T::zero(), |m, &v| m.max(v))
    }
}

/// Stopping rule: converged when every class satisfies `‖Ψ_c‖∞ ≤ tol_feas`,
/// stalled when the last step was shorter than `tol_step` in ∞-norm while
/// still infeasible.
pub fn check_stopping<T: Scalar>(state: &IterateState<T>, tol_feas: f64, tol_step: f64, k_max: usize) -> StopDecision {
    if state.max_violation().f64() <= tol_feas {
        return StopDecision::Converged;
    }
    if let Some(s) = state.last_step_inf {
        if s.f64() < tol_step {
            return StopDecision::Stalled;
        }
    }
    if state.k >= k_max {
        return StopDecision::MaxIterations;
    }
    StopDecision::Continue
}

/// Projects `x` onto `Ω` with the splitting solver.
pub fn project_onto_omega<T: Scalar>(omega: &Omega<T>, x: &[T], settings: &AdmmSettings) -> Result<Vec<T>, Error> {
    let d = x.len();
    let (a, kinds) = omega.to_rows()?;
    let q: Vec<T> = x.iter().map(|&v| -v).collect();
    let constant = T::of(0.5) * vecops::dot(x, x);
    let prog = ConicProgram::new(CscMatrix::identity(d), q, constant, a, kinds)?;
    let mut solver = AdmmSolver::new(settings.clone());
    match solver.solve(&prog, None) {
        Ok(o) => Ok(o.x),
        Err(f) => Err(f.error),
    }
}

/// Restart after a stall: doubles every weight and, if `scale > 0`, moves
/// `x` by uniform noise of relative radius `scale` followed by a projection
/// back onto `Ω`. Clears the warm start.
pub fn run_and_inspect<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    omega: &Omega<T>,
    state: &IterateState<T>,
    w: &PenaltyWeights<T>,
    scale: f64,
    rng: &mut ChaCha8Rng,
    settings: &AdmmSettings,
) -> Result<(IterateState<T>, PenaltyWeights<T>), Error> {
    let w2 = w.doubled();
    let mut x = state.x.clone();
    if scale > 0.0 {
        let (lo, hi) = omega.variable_bounds();
        for i in 0..x.len() {
            let range = if lo[i].is_finite() && hi[i].is_finite() && hi[i] > lo[i] {
                (hi[i] - lo[i]).f64()
            } else {
                x[i].f64().abs().max(1.0)
            };
            let r = scale * range;
            x[i] = x[i] + T::of(rng.random_range(-r..=r));
        }
        x = project_onto_omega(omega, &x, settings)?;
    }
    let mut next = IterateState::new(p, x, &w2);
    next.k = state.k;
    next.restarts = state.restarts + 1;
    Ok((next, w2))
}

#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub status: Status,
    pub x: Vec<T>,
    pub objective: T,
    pub penalty: T,
    pub initial_penalty: T,
    /// `(class name, ‖Ψ_c‖∞)` at the returned point.
    pub max_violation: Vec<(String, T)>,
    pub outer_iterations: usize,
    pub l_updates: usize,
    pub inner_iterations_total: usize,
    pub subproblem_solves: usize,
    pub restarts: usize,
    pub lazy_added: usize,
    pub forced_acceptances: usize,
    pub inexact_subsolves: usize,
    pub wall_time: f64,
    pub trace: Vec<TraceRow<T>>,
    /// `x⁰, x¹, …` when recording is enabled.
    pub iterates: Vec<Vec<T>>,
    /// Per outer iteration, the `L` values tried.
    pub l_trials: Vec<Vec<Vec<T>>>,
    pub weights: PenaltyWeights<T>,
    pub reg: RegParams<T>,
    pub omega: Omega<T>,
    pub admm_stats: AdmmStats,
    pub class_names: Vec<String>,
    pub slice_names: Vec<String>,
}

impl<T: Scalar> SolveReport<T> {
    pub fn max_violation_value(&self) -> T {
        self.max_violation.iter().fold(T::zero(), |m, (_, v)| m.max(*v))
    }
}

/// Runs the outer loop from `x0`.
pub fn gn_solve<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    config: &GnConfig<T>,
    x0: &[T],
) -> Result<SolveReport<T>, Error> {
    validate_problem(p, x0)?;
    config.reg.validate()?;
    if config.weights.beta.len() != p.classes().len() {
        return Err(Error::Dimension("one penalty weight per constraint class expected".into()));
    }
    if config.reg.l.len() != p.layout().slices().len() {
        return Err(Error::Dimension("one L value per variable slice expected".into()));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut omega = p.omega();
    let mut lazy_added = p.separate(x0, &mut omega);
    let mut w = config.weights.clone();
    let mut reg = config.reg.clone();
    let mut solver = AdmmSolver::new(config.admm.clone());
    let mut state = IterateState::new(p, x0.to_vec(), &w);
    let initial_penalty = state.penalty;

    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    if config.record_iterates {
        iterates.push(state.x.clone());
    }
    let mut l_trials = Vec::new();
    let (mut l_updates, mut inner_total, mut solves, mut forced, mut inexact) = (0, 0, 0, 0, 0);
    let mut warm: Option<SplitState<T>> = None;

    let status = loop {
        let mut decision = check_stopping(&state, config.tol_feas, config.tol_step, config.max_iter);
        if decision == StopDecision::Converged
            && config.require_stationarity
            && !state.last_step_inf.is_some_and(|s| s.f64() < config.tol_step)
        {
            decision = if state.k >= config.max_iter { StopDecision::MaxIterations } else { StopDecision::Continue };
        }
        match decision {
            StopDecision::Converged => break Status::Converged,
            StopDecision::MaxIterations => break Status::MaxIterations,
            StopDecision::Stalled => {
                if state.restarts >= config.restart_cap {
                    break Status::Stalled;
                }
                let (s, w2) = run_and_inspect(p, &omega, &state, &w, config.perturb_scale, &mut rng, &config.admm)?;
                state = s;
                w = w2;
                warm = None;
                if state.k >= config.max_iter {
                    break Status::MaxIterations;
                }
                continue;
            }
            StopDecision::Continue => {}
        }

        let lin = Linearization { x: state.x.clone(), psi: state.psi.clone(), jac: p.jacobian(&state.x) };
        let replay = config.replay.as_ref().and_then(|r| r.get(state.k).cloned());
        let mut ctx = LineSearchContext {
            solver: &mut solver,
            warm: warm.take(),
            warm_start: config.warm_start,
            l_cap_factor: config.l_cap_factor,
            lazy_rounds: config.lazy_rounds,
            accept_inexact: config.accept_inexact,
            replay,
        };
        let out = line_search_l(p, &mut omega, &lin, state.penalty, &w, &mut reg, &config.acceptance, &mut ctx)?;
        warm = ctx.warm.take();

        l_updates += out.l_updates;
        inner_total += out.inner_iters;
        solves += out.trials.len();
        lazy_added += out.lazy_added;
        inexact += out.inexact;
        if out.accepted_by == AcceptedBy::Forced {
            forced += 1;
        }
        let l_var = p.layout().expand(&out.l);
        let (g, _, r) = gradient_mapping(&state.x, &out.v, &l_var);
        let step_inf = vecops::dist_inf(&out.v, &state.x);
        let f_prev = state.penalty;

        let (psi_l1, psi_inf) = class_norms(p.classes(), &out.psi_v);
        let restarts = state.restarts;
        state = IterateState {
            x: out.v.clone(),
            k: state.k + 1,
            penalty: out.penalty_v,
            objective: out.objective_v,
            psi: out.psi_v.clone(),
            psi_l1,
            psi_inf,
            g_norm: vecops::norm2(&g),
            step_norm: r,
            last_step_inf: Some(step_inf),
            warm: None,
            restarts,
        };
        if config.record_iterates {
            iterates.push(state.x.clone());
        }
        l_trials.push(out.trials.clone());
        trace.push(TraceRow {
            k: state.k,
            restarts,
            penalty_prev: f_prev,
            penalty: state.penalty,
            objective: state.objective,
            psi_inf: state.psi_inf.clone(),
            psi_l1: state.psi_l1.clone(),
            l: out.l.clone(),
            l_min: reg.smallest_min(),
            r_l: r,
            g_norm: state.g_norm,
            step_inf,
            inner_iters: out.inner_iters,
            l_updates: out.l_updates,
            lazy_added: out.lazy_added,
            accepted_by: out.accepted_by,
            wall_ms: if config.record_timing { Some(start.elapsed().as_secs_f64() * 1e3) } else { None },
        });
    };

    let objective = state.objective;
    Ok(SolveReport {
        status,
        max_violation: p.classes().iter().map(|c| c.name.clone()).zip(state.psi_inf.iter().copied()).collect(),
        x: state.x,
        objective,
        penalty: state.penalty,
        initial_penalty,
        outer_iterations: state.k,
        l_updates,
        inner_iterations_total: inner_total,
        subproblem_solves: solves,
        restarts: state.restarts,
        lazy_added,
        forced_acceptances: forced,
        inexact_subsolves: inexact,
        wall_time: start.elapsed().as_secs_f64(),
        trace,
        iterates,
        l_trials,
        weights: w,
        reg,
        omega,
        admm_stats: solver.stats.clone(),
        class_names: p.classes().iter().map(|c| c.name.clone()).collect(),
        slice_names: p.layout().slices().iter().map(|s| s.name.clone()).collect(),
    })
}
