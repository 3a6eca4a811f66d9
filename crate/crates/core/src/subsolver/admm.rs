//! Operator splitting for [`ConicProgram`]s.
//!
//! The iteration is the OSQP one with the box projection replaced by the
//! per-block proximal map:
//!
//! ```text
//! [P + σI  Aᵀ      ] [x̃]   [σx − q   ]
//! [A      −diag(ρ)⁻¹] [ν ] = [z − ρ⁻¹y ]
//! z̃ = z + ρ⁻¹(ν − y)
//! x ← αx̃ + (1−α)x,  ẑ = αz̃ + (1−α)z
//! z ← prox(ẑ + ρ⁻¹y),  y ← y + ρ(ẑ − z)
//! ```
//!
//! All iterations run on the equilibrated program; residuals for the
//! termination test are measured on the original one.

use std::sync::Arc;

use crate::linalg::{CscMatrix, LdlFactor, LdlSymbolic};
use crate::subsolver::cones;
use crate::subsolver::program::{ConicProgram, RowKind};
use crate::subsolver::scaling::{equilibrate, Scaling};
use crate::{Error, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RhoPolicy {
    Fixed,
    /// Every `interval` iterations compute the residual-balancing value of ρ
    /// and switch to it when it differs from the current one by more than
    /// `factor`.
    Adaptive {
        interval: usize,
        factor: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmmSettings {
    pub rho: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    pub check_every: usize,
    pub rho_policy: RhoPolicy,
    pub scaling_iters: usize,
    /// ρ multiplier on equality rows.
    pub eq_rho_factor: f64,
    /// Start an adaptive run from the ρ stored in the warm state rather
    /// than from `rho`.
    pub warm_rho: bool,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            rho: 1.0,
            sigma: 1e-6,
            alpha: 1.6,
            eps_abs: 1e-8,
            eps_rel: 1e-6,
            max_iter: 50_000,
            check_every: 5,
            rho_policy: RhoPolicy::Fixed,
            scaling_iters: 10,
            eq_rho_factor: 1e3,
            warm_rho: false,
        }
    }
}

/// Primal-dual iterate in the units of the original program, reusable as a
/// warm start for a program of the same dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitState<T> {
    pub x: Vec<T>,
    pub z: Vec<T>,
    pub y: Vec<T>,
    pub rho: f64,
    /// `(iteration, primal residual, dual residual)` at every check.
    pub history: Vec<(usize, f64, f64)>,
    /// How many times ρ was changed during the solve that produced this state.
    pub rho_updates: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmmStatus {
    Solved,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct AdmmOutput<T> {
    pub status: AdmmStatus,
    pub x: Vec<T>,
    /// Multipliers of the rows of `A`; on L1 rows `y/w` is a subgradient of
    /// `|·|` at the row value.
    pub y: Vec<T>,
    pub iters: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub state: SplitState<T>,
}

/// Nonconvergence, carrying the last iterate.
#[derive(Clone, Debug)]
pub struct AdmmFailure<T> {
    pub error: Error,
    pub best: Option<Box<AdmmOutput<T>>>,
}

impl<T> From<Error> for AdmmFailure<T> {
    fn from(error: Error) -> Self {
        AdmmFailure { error, best: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdmmStats {
    pub solves: usize,
    pub symbolic_analyses: usize,
    pub numeric_factorizations: usize,
    pub rejected_warm_starts: usize,
    pub rho_updates: usize,
}

/// Solver object holding the symbolic factorization between calls.
#[derive(Debug)]
pub struct AdmmSolver {
    pub settings: AdmmSettings,
    pub stats: AdmmStats,
    symbolic: Option<Arc<LdlSymbolic>>,
}

/// One-shot convenience wrapper.
pub fn admm_solve<T: Scalar>(
    prog: &ConicProgram<T>,
    warm: Option<&SplitState<T>>,
    settings: &AdmmSettings,
) -> Result<AdmmOutput<T>, AdmmFailure<T>> {
    AdmmSolver::new(settings.clone()).solve(prog, warm)
}

struct Kkt<T> {
    mat: CscMatrix<T>,
    /// Position of the `−1/ρᵢ` diagonal entry of each constraint row.
    rho_diag: Vec<usize>,
}

fn build_kkt<T: Scalar>(p: &CscMatrix<T>, at: &CscMatrix<T>, sigma: T, rho: &[T]) -> Kkt<T> {
    let n = p.ncols;
    let m = at.ncols;
    let mut colptr = Vec::with_capacity(n + m + 1);
    let mut rowval = Vec::with_capacity(p.nnz() + n + at.nnz() + m);
    let mut nzval = Vec::with_capacity(rowval.capacity());
    colptr.push(0);
    for j in 0..n {
        let mut has_diag = false;
        for k in p.colptr[j]..p.colptr[j + 1] {
            let i = p.rowval[k];
            rowval.push(i);
            if i == j {
                nzval.push(p.nzval[k] + sigma);
                has_diag = true;
            } else {
                nzval.push(p.nzval[k]);
            }
        }
        if !has_diag {
            rowval.push(j);
            nzval.push(sigma);
        }
        colptr.push(rowval.len());
    }
    let mut rho_diag = Vec::with_capacity(m);
    for i in 0..m {
        for k in at.colptr[i]..at.colptr[i + 1] {
            rowval.push(at.rowval[k]);
            nzval.push(at.nzval[k]);
        }
        rho_diag.push(rowval.len());
        rowval.push(n + i);
        nzval.push(-T::one() / rho[i]);
        colptr.push(rowval.len());
    }
    Kkt { mat: CscMatrix { nrows: n + m, ncols: n + m, colptr, rowval, nzval }, rho_diag }
}

fn row_rho<T: Scalar>(prog: &ConicProgram<T>, rho: f64, eq_factor: f64) -> Vec<T> {
    let mut out = vec![T::of(rho); prog.m()];
    for b in &prog.blocks {
        match &b.kind {
            RowKind::Zero { .. } => out[b.rows()].iter_mut().for_each(|v| *v = T::of(rho * eq_factor)),
            RowKind::Box { lo, hi } => {
                for (k, (l, h)) in lo.iter().zip(hi).enumerate() {
                    if l == h {
                        out[b.start + k] = T::of(rho * eq_factor);
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Proximal step on the scaled program: `z ← prox(v)` block by block.
fn prox_blocks<T: Scalar>(prog: &ConicProgram<T>, v: &[T], rho: &[T], z: &mut [T]) -> Result<(), Error> {
    for b in &prog.blocks {
        let r = b.rows();
        let (vb, zb) = (&v[r.clone()], &mut z[r.clone()]);
        match &b.kind {
            RowKind::Zero { rhs } => zb.copy_from_slice(rhs),
            RowKind::Box { lo, hi } => {
                for k in 0..vb.len() {
                    zb[k] = vb[k].max(lo[k]).min(hi[k]);
                }
            }
            RowKind::SecondOrder { offset } => {
                for k in 0..vb.len() {
                    zb[k] = vb[k] + offset[k];
                }
                cones::project_soc_in_place(zb);
                for k in 0..vb.len() {
                    zb[k] = zb[k] - offset[k];
                }
            }
            RowKind::Psd { side, offset } => {
                for k in 0..vb.len() {
                    zb[k] = vb[k] + offset[k];
                }
                cones::project_psd_svec_in_place(zb, *side)?;
                for k in 0..vb.len() {
                    zb[k] = zb[k] - offset[k];
                }
            }
            RowKind::L1 { weight, offset } => {
                for k in 0..vb.len() {
                    let t = weight[k] / rho[r.start + k];
                    zb[k] = cones::soft_threshold(vb[k] + offset[k], t) - offset[k];
                }
            }
        }
    }
    Ok(())
}

struct Residuals {
    primal: f64,
    dual: f64,
    eps_primal: f64,
    eps_dual: f64,
    /// Normalized residuals on the scaled problem, for ρ adaptation.
    primal_rel: f64,
    dual_rel: f64,
}

impl AdmmSolver {
    pub fn new(settings: AdmmSettings) -> Self {
        AdmmSolver { settings, stats: AdmmStats::default(), symbolic: None }
    }

    /// Drops the cached symbolic factorization.
    pub fn clear_cache(&mut self) {
        self.symbolic = None;
    }

    fn factor<T: Scalar>(&mut self, kkt: &CscMatrix<T>) -> Result<LdlFactor<T>, Error> {
        let sym = match &self.symbolic {
            Some(s) if s.matches(kkt) => s.clone(),
            _ => {
                let s = Arc::new(LdlSymbolic::analyze(kkt)?);
                self.stats.symbolic_analyses += 1;
                self.symbolic = Some(s.clone());
                s
            }
        };
        self.stats.numeric_factorizations += 1;
        LdlFactor::factor(sym, kkt)
    }

    pub fn solve<T: Scalar>(
        &mut self,
        prog: &ConicProgram<T>,
        warm: Option<&SplitState<T>>,
    ) -> Result<AdmmOutput<T>, AdmmFailure<T>> {
        prog.validate()?;
        self.stats.solves += 1;
        let set = self.settings.clone();
        let n = prog.n();
        let m = prog.m();
        let (sp, sc) = equilibrate(prog, set.scaling_iters);
        let at = sp.a.transpose();

        let warm = match warm {
            Some(w) if w.x.len() == n && w.z.len() == m && w.y.len() == m => Some(w),
            Some(_) => {
                self.stats.rejected_warm_starts += 1;
                None
            }
            None => None,
        };
        let mut rho_base = match (warm, set.rho_policy) {
            (Some(w), RhoPolicy::Adaptive { .. }) if set.warm_rho && w.rho > 0.0 => w.rho,
            _ => set.rho,
        };
        let mut rho = row_rho(&sp, rho_base, set.eq_rho_factor);
        let sigma = T::of(set.sigma);
        let mut kkt = build_kkt(&sp.p, &at, sigma, &rho);
        let mut fac = self.factor(&kkt.mat)?;

        let (mut x, mut z, mut y) = match warm {
            Some(w) => (
                w.x.iter().zip(&sc.d).map(|(&v, &d)| v / d).collect(),
                w.z.iter().zip(&sc.e).map(|(&v, &e)| v * e).collect(),
                w.y.iter().zip(&sc.e).map(|(&v, &e)| sc.c * v / e).collect(),
            ),
            None => (vec![T::zero(); n], vec![T::zero(); m], vec![T::zero(); m]),
        };
        if warm.is_none() {
            // Start z inside the blocks so the first proximal step is sane.
            let v = z.clone();
            prox_blocks(&sp, &v, &rho, &mut z)?;
        }

        let alpha = T::of(set.alpha);
        let one_m_alpha = T::one() - alpha;
        let mut rhs = vec![T::zero(); n + m];
        let mut z_hat = vec![T::zero(); m];
        let mut v = vec![T::zero(); m];
        let mut history = Vec::new();
        let mut rho_updates = 0;
        let mut last = None;
        let mut iters = 0;
        let mut status = AdmmStatus::MaxIterations;

        // A warm start may already be optimal.
        let r0 = self.residuals(&sp, &sc, &at, &x, &z, &y);
        history.push((0, r0.primal, r0.dual));
        if warm.is_some() && r0.primal <= r0.eps_primal && r0.dual <= r0.eps_dual {
            status = AdmmStatus::Solved;
            last = Some(r0);
        }

        while status != AdmmStatus::Solved && iters < set.max_iter {
            iters += 1;
            for j in 0..n {
                rhs[j] = sigma * x[j] - sp.q[j];
            }
            for i in 0..m {
                rhs[n + i] = z[i] - y[i] / rho[i];
            }
            fac.solve(&mut rhs);
            for j in 0..n {
                x[j] = alpha * rhs[j] + one_m_alpha * x[j];
            }
            for i in 0..m {
                let zt = z[i] + (rhs[n + i] - y[i]) / rho[i];
                z_hat[i] = alpha * zt + one_m_alpha * z[i];
                v[i] = z_hat[i] + y[i] / rho[i];
            }
            prox_blocks(&sp, &v, &rho, &mut z)?;
            for i in 0..m {
                y[i] = y[i] + rho[i] * (z_hat[i] - z[i]);
            }

            if iters % set.check_every == 0 || iters == set.max_iter {
                let r = self.residuals(&sp, &sc, &at, &x, &z, &y);
                history.push((iters, r.primal, r.dual));
                let done = r.primal <= r.eps_primal && r.dual <= r.eps_dual;
                if let (false, RhoPolicy::Adaptive { interval, factor }) = (done, set.rho_policy) {
                    if iters % interval == 0 && r.dual_rel > 0.0 {
                        let cand = (rho_base * (r.primal_rel / r.dual_rel).sqrt()).clamp(1e-6, 1e6);
                        if cand > factor * rho_base || cand < rho_base / factor {
                            rho_base = cand;
                            rho = row_rho(&sp, rho_base, set.eq_rho_factor);
                            for (i, &pos) in kkt.rho_diag.iter().enumerate() {
                                kkt.mat.nzval[pos] = -T::one() / rho[i];
                            }
                            fac = self.factor(&kkt.mat)?;
                            rho_updates += 1;
                            self.stats.rho_updates += 1;
                        }
                    }
                }
                last = Some(r);
                if done {
                    status = AdmmStatus::Solved;
                }
            }
        }

        let r = last.expect("residuals evaluated at least once");
        let out = AdmmOutput {
            status,
            x: x.iter().zip(&sc.d).map(|(&v, &d)| v * d).collect(),
            y: y.iter().zip(&sc.e).map(|(&v, &e)| v * e / sc.c).collect(),
            iters,
            primal_residual: r.primal,
            dual_residual: r.dual,
            state: SplitState {
                x: x.iter().zip(&sc.d).map(|(&v, &d)| v * d).collect(),
                z: z.iter().zip(&sc.e).map(|(&v, &e)| v / e).collect(),
                y: y.iter().zip(&sc.e).map(|(&v, &e)| v * e / sc.c).collect(),
                rho: rho_base,
                history,
                rho_updates,
            },
        };
        match status {
            AdmmStatus::Solved => Ok(out),
            AdmmStatus::MaxIterations => Err(AdmmFailure {
                error: Error::SubsolverNonConvergence { iters, primal: r.primal, dual: r.dual },
                best: Some(Box::new(out)),
            }),
        }
    }

    fn residuals<T: Scalar>(
        &self,
        sp: &ConicProgram<T>,
        sc: &Scaling<T>,
        at: &CscMatrix<T>,
        x: &[T],
        z: &[T],
        y: &[T],
    ) -> Residuals {
        let n = sp.n();
        let m = sp.m();
        let ax = sp.a.mul_vec(x);
        let mut px = vec![T::zero(); n];
        sp.p.sym_upper_mul_vec_into(x, &mut px, false);
        let aty = at.mul_vec(y);

        let mut primal = 0.0f64;
        let (mut ax_n, mut z_n) = (0.0f64, 0.0f64);
        let (mut s_primal, mut s_ax, mut s_z) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..m {
            let ie = 1.0 / sc.e[i].f64();
            let (a, zz) = (ax[i].f64(), z[i].f64());
            primal = primal.max(((a - zz) * ie).abs());
            ax_n = ax_n.max((a * ie).abs());
            z_n = z_n.max((zz * ie).abs());
            s_primal = s_primal.max((a - zz).abs());
            s_ax = s_ax.max(a.abs());
            s_z = s_z.max(zz.abs());
        }
        let ic = 1.0 / sc.c.f64();
        let mut dual = 0.0f64;
        let (mut px_n, mut aty_n, mut q_n) = (0.0f64, 0.0f64, 0.0f64);
        let (mut s_dual, mut s_px, mut s_aty, mut s_q) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for j in 0..n {
            let id = ic / sc.d[j].f64();
            let (p, a, q) = (px[j].f64(), aty[j].f64(), sp.q[j].f64());
            dual = dual.max(((p + a + q) * id).abs());
            px_n = px_n.max((p * id).abs());
            aty_n = aty_n.max((a * id).abs());
            q_n = q_n.max((q * id).abs());
            s_dual = s_dual.max((p + a + q).abs());
            s_px = s_px.max(p.abs());
            s_aty = s_aty.max(a.abs());
            s_q = s_q.max(q.abs());
        }
        let set = &self.settings;
        let tiny = 1e-30;
        Residuals {
            primal,
            dual,
            eps_primal: set.eps_abs + set.eps_rel * ax_n.max(z_n),
            eps_dual: set.eps_abs + set.eps_rel * px_n.max(aty_n).max(q_n),
            primal_rel: s_primal / s_ax.max(s_z).max(tiny),
            dual_rel: s_dual / s_px.max(s_aty).max(s_q).max(tiny),
        }
    }
}
