//! Modified Ruiz equilibration of a conic program.
//!
//! Variables are scaled by `D`, constraint rows by `E` and the objective by
//! `c`: `P̄ = c·D P D`, `q̄ = c·D q`, `Ā = E A D`. Rows of a cone block share a
//! single factor so the cone is mapped onto itself.

use crate::linalg::CscMatrix;
use crate::subsolver::program::{ConicProgram, RowKind};
use crate::Scalar;

const MIN_NORM: f64 = 1e-4;
const MAX_NORM: f64 = 1e4;

#[derive(Clone, Debug)]
pub struct Scaling<T> {
    pub d: Vec<T>,
    pub e: Vec<T>,
    pub c: T,
}

impl<T: Scalar> Scaling<T> {
    pub fn identity(n: usize, m: usize) -> Self {
        Scaling { d: vec![T::one(); n], e: vec![T::one(); m], c: T::one() }
    }
}

fn inv_sqrt_clamped<T: Scalar>(v: T) -> T {
    let v = v.f64();
    if v < MIN_NORM {
        T::one()
    } else {
        T::of(1.0 / v.min(MAX_NORM).sqrt())
    }
}

/// Returns the scaled program together with the scaling used.
pub fn equilibrate<T: Scalar>(prog: &ConicProgram<T>, iters: usize) -> (ConicProgram<T>, Scaling<T>) {
    let n = prog.n();
    let m = prog.m();
    let mut p = prog.p.clone();
    let mut a = prog.a.clone();
    let mut q = prog.q.clone();
    let mut sc = Scaling::identity(n, m);

    for _ in 0..iters {
        let pc = sym_upper_col_norms(&p);
        let ac = a.col_norms_inf();
        let dt: Vec<T> = (0..n).map(|j| inv_sqrt_clamped(pc[j].max(ac[j]))).collect();
        let ar = a.row_norms_inf();
        let mut et: Vec<T> = ar.iter().map(|&v| inv_sqrt_clamped(v)).collect();
        for b in &prog.blocks {
            if matches!(b.kind, RowKind::SecondOrder { .. } | RowKind::Psd { .. }) {
                let r = b.rows();
                let mn = et[r.clone()].iter().fold(T::infinity(), |m, &v| m.min(v));
                et[r].iter_mut().for_each(|v| *v = mn);
            }
        }
        p.scale(&dt, &dt);
        a.scale(&et, &dt);
        for j in 0..n {
            q[j] = q[j] * dt[j];
            sc.d[j] = sc.d[j] * dt[j];
        }
        for i in 0..m {
            sc.e[i] = sc.e[i] * et[i];
        }

        let pc = sym_upper_col_norms(&p);
        let mean = if n > 0 { pc.iter().fold(T::zero(), |s, &v| s + v) / T::of(n as f64) } else { T::zero() };
        let qn = q.iter().fold(T::zero(), |s, &v| s.max(v.abs()));
        let ct = inv_sqrt_clamped(mean.max(qn));
        let ct = ct * ct;
        p.nzval.iter_mut().for_each(|v| *v = *v * ct);
        q.iter_mut().for_each(|v| *v = *v * ct);
        sc.c = sc.c * ct;
    }

    let blocks = prog
        .blocks
        .iter()
        .map(|b| {
            let e = &sc.e[b.rows()];
            let kind = match &b.kind {
                RowKind::Zero { rhs } => RowKind::Zero { rhs: mul(rhs, e) },
                RowKind::Box { lo, hi } => RowKind::Box { lo: mul(lo, e), hi: mul(hi, e) },
                RowKind::SecondOrder { offset } => RowKind::SecondOrder { offset: mul(offset, e) },
                RowKind::Psd { side, offset } => RowKind::Psd { side: *side, offset: mul(offset, e) },
                RowKind::L1 { weight, offset } => RowKind::L1 {
                    weight: weight.iter().zip(e).map(|(&w, &ei)| sc.c * w / ei).collect(),
                    offset: mul(offset, e),
                },
            };
            crate::subsolver::program::RowBlock { start: b.start, kind }
        })
        .collect();
    let scaled = ConicProgram { p, q, constant: prog.constant * sc.c, a, blocks };
    (scaled, sc)
}

fn mul<T: Scalar>(v: &[T], e: &[T]) -> Vec<T> {
    // Infinite box bounds stay infinite.
    v.iter().zip(e).map(|(&a, &b)| if a.is_infinite() { a } else { a * b }).collect()
}

fn sym_upper_col_norms<T: Scalar>(p: &CscMatrix<T>) -> Vec<T> {
    let mut out = vec![T::zero(); p.ncols];
    for j in 0..p.ncols {
        for k in p.colptr[j]..p.colptr[j + 1] {
            let i = p.rowval[k];
            let v = p.nzval[k].abs();
            out[j] = out[j].max(v);
            out[i] = out[i].max(v);
        }
    }
    out
}
