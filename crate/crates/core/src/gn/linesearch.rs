use crate::gn::params::{PenaltyWeights, RegParams, Strategy};
use crate::gn::penalty::{class_norms, linearized_residual, weighted_l1};
use crate::gn::problem::{NonconvexProblem, Omega};
use crate::gn::subproblem::{solve_subproblem, Linearization, SubSolution, Warm};
use crate::linalg::vecops;
use crate::subsolver::{AdmmSolver, SplitState};
use crate::{Error, Scalar};

/// Per-class acceptance comparison:
/// `β_c‖Ψ_c(V)‖₁ ≤ β_c‖Ψ_c(x) + Ψ'_c(x)d‖₁ + Σ_{s ∈ prox_slices} L_s/2 ‖d_s‖²`.
/// When it fails, the slices in `update_slices` are increased.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitRule {
    pub class: usize,
    pub prox_slices: Vec<usize>,
    pub update_slices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Acceptance {
    /// Checked in order before the global model test; the first failing rule
    /// decides which slices are increased.
    pub cascade: Vec<SplitRule>,
    /// Accept without the model test when the ℓ1 and ℓ∞ norms of every class
    /// decreased and the sufficient-decrease inequality holds.
    pub relaxed_precheck: bool,
    /// Slices increased when the global test fails (all slices if `None`).
    pub global_update: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcceptedBy {
    Precheck,
    Model,
    /// Fixed strategy: the test failed but `L` may not change.
    Forced,
    /// L schedule replayed from an earlier run.
    Replay,
}

impl AcceptedBy {
    pub fn name(&self) -> &'static str {
        match self {
            AcceptedBy::Precheck => "precheck",
            AcceptedBy::Model => "model",
            AcceptedBy::Forced => "forced",
            AcceptedBy::Replay => "replay",
        }
    }
}

/// Mutable solver-side context shared across line searches.
pub struct LineSearchContext<'a, T> {
    pub solver: &'a mut AdmmSolver,
    pub warm: Option<SplitState<T>>,
    pub warm_start: bool,
    /// Upper limit on `L` as a multiple of `β·L_Ψ` (or of the largest `L_min`
    /// when `L_Ψ` is unknown, times 10⁶).
    pub l_cap_factor: f64,
    pub lazy_rounds: usize,
    pub accept_inexact: bool,
    /// Trial values of `L` to replay instead of testing.
    pub replay: Option<Vec<Vec<T>>>,
}

#[derive(Clone, Debug)]
pub struct LineSearchOutcome<T> {
    pub v: Vec<T>,
    pub sub: SubSolution<T>,
    /// Accepted per-slice `L`.
    pub l: Vec<T>,
    /// Every `L` for which the subproblem was solved to completion, in order.
    pub trials: Vec<Vec<T>>,
    pub l_updates: usize,
    pub inner_iters: usize,
    pub lazy_added: usize,
    pub accepted_by: AcceptedBy,
    pub penalty_v: T,
    pub objective_v: T,
    pub psi_v: Vec<T>,
    pub model_v: T,
    pub inexact: usize,
}

/// Relative slack on the acceptance comparisons, covering subsolver accuracy.
const ACCEPT_SLACK: f64 = 1e-9;

/// Finds `L` (per slice) such that `V_L(x_k)` passes the acceptance test and
/// returns it with the step. `reg.l` is left at the accepted value.
#[allow(clippy::too_many_arguments)]
pub fn line_search_l<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    omega: &mut Omega<T>,
    lin: &Linearization<T>,
    penalty_k: T,
    w: &PenaltyWeights<T>,
    reg: &mut RegParams<T>,
    acc: &Acceptance,
    ctx: &mut LineSearchContext<T>,
) -> Result<LineSearchOutcome<T>, Error> {
    let layout = p.layout();
    let nslices = layout.slices().len();
    if reg.l.len() != nslices {
        return Err(Error::Dimension("one L value per variable slice expected".into()));
    }
    if !reg.carry_over && reg.strategy != Strategy::Fixed {
        reg.l = reg.l_min.clone();
    }
    let upper = p.lipschitz().map(|lp| w.max() * lp);
    let big_min = reg.l_min.iter().fold(T::zero(), |m, &v| m.max(v));
    let cap = match upper {
        Some(u) => u.max(big_min) * T::of(ctx.l_cap_factor),
        None => big_min * T::of(ctx.l_cap_factor * 1e6),
    };
    let (l1_k, inf_k) = class_norms(p.classes(), &lin.psi);
    let slack = T::of(ACCEPT_SLACK) * (T::one() + penalty_k.abs());
    let half = T::of(0.5);

    let mut trials = Vec::new();
    let mut l_updates = 0;
    let mut inner = 0;
    let mut lazy_added = 0;
    let mut lazy_rounds = 0;
    let mut inexact = 0;
    if let Some(r) = ctx.replay.as_ref().and_then(|r| r.first()) {
        reg.l = r.clone();
    }

    loop {
        let l_var = layout.expand(&reg.l);
        let warm = match (ctx.warm_start, ctx.warm.as_ref()) {
            (false, _) => Warm::Cold,
            (true, Some(st)) => Warm::State(st),
            (true, None) => Warm::Primal,
        };
        let sub = solve_subproblem(ctx.solver, p, omega, lin, w, &l_var, warm)?;
        inner += sub.inner_iters;
        if !sub.converged {
            if !ctx.accept_inexact {
                return Err(Error::SubsolverNonConvergence {
                    iters: sub.inner_iters,
                    primal: sub.primal_residual,
                    dual: sub.dual_residual,
                });
            }
            inexact += 1;
        }
        if ctx.warm_start {
            ctx.warm = Some(sub.state.clone());
        }
        if lazy_rounds < ctx.lazy_rounds {
            let added = p.separate(&sub.v, omega);
            if added > 0 {
                lazy_added += added;
                lazy_rounds += 1;
                // Row count changed; the old state no longer fits.
                ctx.warm = None;
                continue;
            }
        }
        trials.push(reg.l.clone());

        let v = sub.v.clone();
        let psi_v = p.residual(&v);
        let objective_v = p.objective().value(&v);
        let penalty_v = objective_v + weighted_l1(p.classes(), w, &psi_v);
        let lin_v = linearized_residual(&lin.psi, &lin.jac, &lin.x, &v);
        let d = vecops::sub(&v, &lin.x);
        let slice_sq: Vec<T> = layout
            .slices()
            .iter()
            .map(|s| {
                let ds = &d[s.range.clone()];
                vecops::dot(ds, ds)
            })
            .collect();
        let prox_all = (0..nslices).fold(T::zero(), |s, k| s + half * reg.l[k] * slice_sq[k]);
        let model_v = objective_v + weighted_l1(p.classes(), w, &lin_v) + prox_all;

        let done = |accepted_by, reg: &RegParams<T>, trials: Vec<Vec<T>>| LineSearchOutcome {
            v: v.clone(),
            sub: sub.clone(),
            l: reg.l.clone(),
            trials,
            l_updates,
            inner_iters: inner,
            lazy_added,
            accepted_by,
            penalty_v,
            objective_v,
            psi_v: psi_v.clone(),
            model_v,
            inexact,
        };

        if let Some(replay) = &ctx.replay {
            if trials.len() >= replay.len() {
                return Ok(done(AcceptedBy::Replay, reg, trials));
            }
            reg.l = replay[trials.len()].clone();
            l_updates += 1;
            continue;
        }

        if acc.relaxed_precheck {
            let (l1_v, inf_v) = class_norms(p.classes(), &psi_v);
            let decreased = (0..l1_k.len()).all(|c| l1_v[c] < l1_k[c] && inf_v[c] < inf_k[c]);
            let r2 = slice_sq.iter().fold(T::zero(), |s, &v| s + v);
            let descent = penalty_v <= penalty_k - half * reg.smallest_min() * r2 + slack;
            if decreased && descent {
                return Ok(done(AcceptedBy::Precheck, reg, trials));
            }
        }

        let mut update: Option<Vec<usize>> = None;
        for rule in &acc.cascade {
            let c = &p.classes()[rule.class];
            let beta = w.beta[rule.class];
            let lhs = beta * vecops::norm1(&psi_v[c.rows.clone()]);
            let prox = rule.prox_slices.iter().fold(T::zero(), |s, &k| s + half * reg.l[k] * slice_sq[k]);
            let rhs = beta * vecops::norm1(&lin_v[c.rows.clone()]) + prox;
            if lhs > rhs + slack {
                update = Some(rule.update_slices.clone());
                break;
            }
        }
        if update.is_none() {
            if penalty_v <= model_v + slack {
                return Ok(done(AcceptedBy::Model, reg, trials));
            }
            update = Some(acc.global_update.clone().unwrap_or_else(|| (0..nslices).collect()));
        }

        if reg.strategy == Strategy::Fixed {
            return Ok(done(AcceptedBy::Forced, reg, trials));
        }
        for s in update.unwrap_or_default() {
            reg.l[s] = reg.bumped(s, upper);
        }
        l_updates += 1;
        if let Some(&big) = reg.l.iter().find(|&&l| l > cap) {
            return Err(Error::LineSearch { l: big.f64(), cap: cap.f64() });
        }
    }
}
