use crate::gn::params::PenaltyWeights;
use crate::gn::problem::{NonconvexProblem, Omega};
use crate::linalg::CscMatrix;
use crate::subsolver::{AdmmSolver, AdmmStatus, ConicProgram, RowKind, SplitState};
use crate::{Error, Scalar};

/// Residual and Jacobian of `Ψ` at the current iterate.
#[derive(Clone, Debug)]
pub struct Linearization<T> {
    pub x: Vec<T>,
    pub psi: Vec<T>,
    pub jac: CscMatrix<T>,
}

impl<T: Scalar> Linearization<T> {
    pub fn at<P: NonconvexProblem<T> + ?Sized>(p: &P, x: &[T]) -> Self {
        Linearization { x: x.to_vec(), psi: p.residual(x), jac: p.jacobian(x) }
    }
}

/// Builds the strongly convex model problem at `lin.x`:
///
/// `min f(y) + Σ_c β_c‖Ψ_c + J_c(y − x_k)‖₁ + ½ Σ Lᵢ (yᵢ − x_k,ᵢ)²  s.t. y ∈ Ω`
///
/// `l_var` holds one proximal weight per variable. The `Ω` rows come first,
/// followed by one L1 block holding `J` with offset `Ψ(x_k) − J x_k`.
pub fn assemble<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    omega: &Omega<T>,
    lin: &Linearization<T>,
    w: &PenaltyWeights<T>,
    l_var: &[T],
) -> Result<ConicProgram<T>, Error> {
    let d = p.dim();
    if l_var.len() != d || lin.x.len() != d || omega.dim != d {
        return Err(Error::Dimension("subproblem pieces disagree on the dimension".into()));
    }
    let obj = p.objective();
    let half = T::of(0.5);
    let diag: Vec<T> = obj.hess_diag.iter().zip(l_var).map(|(&h, &l)| h + l).collect();
    let q: Vec<T> = (0..d).map(|i| obj.linear[i] - l_var[i] * lin.x[i]).collect();
    let constant = obj.constant + (0..d).fold(T::zero(), |s, i| s + half * l_var[i] * lin.x[i] * lin.x[i]);

    let (a_omega, mut kinds) = omega.to_rows()?;
    let jx = lin.jac.mul_vec(&lin.x);
    let offset: Vec<T> = lin.psi.iter().zip(&jx).map(|(&a, &b)| a - b).collect();
    let mut weight = vec![T::zero(); lin.psi.len()];
    for (c, &b) in p.classes().iter().zip(&w.beta) {
        weight[c.rows.clone()].iter_mut().for_each(|v| *v = b);
    }
    if !lin.psi.is_empty() {
        kinds.push(RowKind::L1 { weight, offset });
    }
    let a = CscMatrix::vstack(&[&a_omega, &lin.jac]);
    ConicProgram::new(CscMatrix::diagonal(&diag), q, constant, a, kinds)
}

/// Starting point of the splitting method for one subproblem.
#[derive(Clone, Copy, Debug)]
pub enum Warm<'a, T> {
    Cold,
    /// Primal variables at the linearization point, zero multipliers.
    Primal,
    State(&'a SplitState<T>),
}

#[derive(Clone, Debug)]
pub struct SubSolution<T> {
    /// Minimizer `V_L(x_k)`.
    pub v: Vec<T>,
    /// Subgradient selection of `‖·‖₁` at the linearized residual, read off
    /// the multipliers of the penalty rows (`y/β`, within `[−1, 1]` up to
    /// solver accuracy).
    pub xi: Vec<T>,
    pub inner_iters: usize,
    pub state: SplitState<T>,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Assembles and solves the model problem. Nonconvergence of the splitting is
/// not an error here: the last iterate is returned with `converged = false`
/// and the caller decides.
pub fn solve_subproblem<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    solver: &mut AdmmSolver,
    p: &P,
    omega: &Omega<T>,
    lin: &Linearization<T>,
    w: &PenaltyWeights<T>,
    l_var: &[T],
    warm: Warm<'_, T>,
) -> Result<SubSolution<T>, Error> {
    let prog = assemble(p, omega, lin, w, l_var)?;
    let primal;
    let warm = match warm {
        Warm::Cold => None,
        Warm::Primal => {
            primal = SplitState {
                x: lin.x.clone(),
                z: prog.a.mul_vec(&lin.x),
                y: vec![T::zero(); prog.m()],
                rho: 0.0,
                history: Vec::new(),
                rho_updates: 0,
            };
            Some(&primal)
        }
        Warm::State(st) => Some(st),
    };
    let out = match solver.solve(&prog, warm) {
        Ok(o) => o,
        Err(f) => match f.best {
            Some(b) => *b,
            None => return Err(f.error),
        },
    };
    let n_omega = omega.rows();
    let mut xi = vec![T::zero(); lin.psi.len()];
    for (c, &b) in p.classes().iter().zip(&w.beta) {
        for r in c.rows.clone() {
            xi[r] = out.y[n_omega + r] / b;
        }
    }
    Ok(SubSolution {
        v: out.x,
        xi,
        inner_iters: out.iters,
        state: out.state,
        converged: out.status == AdmmStatus::Solved,
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
    })
}
