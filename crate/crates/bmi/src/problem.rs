//! The BMI problem in the penalty framework.
//!
//! Decision vector `x = (t, F, P, S)`: `F` row-major, `P` and `S` packed by
//! [`svec`]. The residual is the upper triangle of
//! `Ψ = (A + BFC)ᵀP + P(A + BFC) + 2tP + S`, one row per entry, unscaled.

use l1gn::gn::{
    ConstraintClass, NonconvexProblem, Omega, OmegaBlock, OmegaKind, QuadObjective, VarSlice, VariableLayout,
};
use l1gn::linalg::CscMatrix;
use l1gn::subsolver::cones::{smat, svec, svec_index, svec_len};
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::BmiError;
use crate::instance::BmiInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmiSettings {
    pub beta: f64,
    pub l0: f64,
    /// Bound on `|F_ij|`.
    pub f_bound: f64,
    /// Bound on `‖P‖_F`.
    pub p_bound: f64,
    /// Bound on `|t|`.
    pub t_bound: f64,
    /// `P ⪰ p_floor·I`; 0 gives the plain cone, which admits `P = S = 0`
    /// with any `t`.
    pub p_floor: f64,
    /// Pairs sampled for the Jacobian Lipschitz estimate.
    pub lipschitz_samples: usize,
    pub lipschitz_safety: f64,
    pub seed: u64,
}

impl Default for BmiSettings {
    fn default() -> Self {
        BmiSettings {
            beta: 1000.0,
            l0: 1.0,
            f_bound: 1e3,
            p_bound: 1e3,
            t_bound: 1e3,
            p_floor: 1.0,
            lipschitz_samples: 100,
            lipschitz_safety: 2.0,
            seed: 0,
        }
    }
}

/// Index map of the decision vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BmiIndex {
    pub n: usize,
    pub nu: usize,
    pub ny: usize,
}

impl BmiIndex {
    pub const T: usize = 0;
    pub const SLICE_T: usize = 0;
    pub const SLICE_F: usize = 1;
    pub const SLICE_P: usize = 2;
    pub const SLICE_S: usize = 3;

    pub fn f(&self, a: usize, b: usize) -> usize {
        1 + a * self.ny + b
    }

    pub fn p(&self, k: usize) -> usize {
        1 + self.nu * self.ny + k
    }

    pub fn s(&self, k: usize) -> usize {
        self.p(self.packed()) + k
    }

    pub fn packed(&self) -> usize {
        svec_len(self.n)
    }

    pub fn dim(&self) -> usize {
        1 + self.nu * self.ny + 2 * self.packed()
    }
}

/// Point unpacked into matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct BmiPoint {
    pub t: f64,
    pub f: Vec<f64>,
    pub p: DMatrix<f64>,
    pub s: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct BmiProblem {
    pub inst: BmiInstance,
    pub ix: BmiIndex,
    pub settings: BmiSettings,
    objective: QuadObjective<f64>,
    classes: Vec<ConstraintClass>,
    layout: VariableLayout,
    lipschitz: f64,
}

fn packed_to_na(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, &smat(v, n))
}

fn upper(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = vec![0.0; svec_len(n)];
    for j in 0..n {
        for i in 0..=j {
            out[svec_index(i, j)] = m[(i, j)];
        }
    }
    out
}

/// `smat(e_k)`: the matrix direction of packed coordinate `k`.
fn unit_direction(k: usize, n: usize) -> DMatrix<f64> {
    let mut e = vec![0.0; svec_len(n)];
    e[k] = 1.0;
    packed_to_na(&e, n)
}

pub fn build_bmi_problem(inst: &BmiInstance, settings: &BmiSettings) -> Result<BmiProblem, BmiError> {
    inst.validate()?;
    if !(settings.beta > 0.0 && settings.l0 > 0.0) {
        return Err(BmiError::Dimension("β and L₀ must be positive".into()));
    }
    let ix = BmiIndex { n: inst.n(), nu: inst.nu(), ny: inst.ny() };
    let d = ix.dim();
    let mut objective = QuadObjective::zero(d);
    objective.linear[BmiIndex::T] = -1.0;
    let classes = vec![ConstraintClass { name: "lyapunov".into(), rows: 0..ix.packed() }];
    let layout = VariableLayout::new(vec![
        VarSlice { name: "t".into(), range: 0..1 },
        VarSlice { name: "F".into(), range: 1..ix.p(0) },
        VarSlice { name: "P".into(), range: ix.p(0)..ix.s(0) },
        VarSlice { name: "S".into(), range: ix.s(0)..d },
    ])?;
    let mut prob =
        BmiProblem { inst: inst.clone(), ix, settings: settings.clone(), objective, classes, layout, lipschitz: 0.0 };
    prob.lipschitz = prob.estimate_lipschitz();
    Ok(prob)
}

impl BmiProblem {
    pub fn point(&self, x: &[f64]) -> BmiPoint {
        let ix = self.ix;
        let np = ix.packed();
        BmiPoint {
            t: x[BmiIndex::T],
            f: x[ix.f(0, 0)..ix.p(0)].to_vec(),
            p: packed_to_na(&x[ix.p(0)..ix.p(0) + np], ix.n),
            s: packed_to_na(&x[ix.s(0)..ix.s(0) + np], ix.n),
        }
    }

    pub fn to_vec(&self, pt: &BmiPoint) -> Vec<f64> {
        let n = self.ix.n;
        let mut x = vec![pt.t];
        x.extend_from_slice(&pt.f);
        x.extend(svec(pt.p.transpose().as_slice(), n));
        x.extend(svec(pt.s.transpose().as_slice(), n));
        x
    }

    /// `Ψ` as a matrix.
    pub fn residual_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let pt = self.point(x);
        let k = self.inst.closed_loop(&pt.f);
        k.transpose() * &pt.p + &pt.p * &k + &pt.p * (2.0 * pt.t) + &pt.s
    }

    fn jacobian_dense(&self, x: &[f64]) -> Vec<(usize, usize, f64)> {
        let ix = self.ix;
        let n = ix.n;
        let pt = self.point(x);
        let k = self.inst.closed_loop(&pt.f);
        let (b, c) = (self.inst.b.to_na(), self.inst.c.to_na());
        let mut trip = Vec::new();
        let mut column = |col: usize, dm: &DMatrix<f64>| {
            for (row, v) in upper(dm).into_iter().enumerate() {
                trip.push((row, col, v));
            }
        };
        column(BmiIndex::T, &(&pt.p * 2.0));
        for a in 0..ix.nu {
            let w = &pt.p * b.column(a);
            for bb in 0..ix.ny {
                let v = c.row(bb).transpose();
                let dm = &v * w.transpose() + &w * v.transpose();
                column(ix.f(a, bb), &dm);
            }
        }
        for kk in 0..ix.packed() {
            let e = unit_direction(kk, n);
            let dm = k.transpose() * &e + &e * &k + &e * (2.0 * pt.t);
            column(ix.p(kk), &dm);
        }
        // S enters linearly: only the matching row is structurally nonzero.
        for kk in 0..ix.packed() {
            let e = unit_direction(kk, n);
            let (mut i, mut j) = (0, 0);
            'find: for jj in 0..n {
                for ii in 0..=jj {
                    if svec_index(ii, jj) == kk {
                        (i, j) = (ii, jj);
                        break 'find;
                    }
                }
            }
            trip.push((kk, ix.s(kk), e[(i, j)]));
        }
        trip
    }

    /// `max ‖Ψ'(x) − Ψ'(x̂)‖₂ / ‖x − x̂‖` over random pairs, times the safety
    /// factor. `Ψ` is quadratic, so the ratio depends only on the direction
    /// `x − x̂`, not on where the pairs are drawn.
    fn estimate_lipschitz(&self) -> f64 {
        let d = self.ix.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        let mut best: f64 = 0.0;
        for _ in 0..self.settings.lipschitz_samples {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let jx = DMatrix::from_row_slice(self.residual_len(), d, &flatten(&self.jacobian(&x).to_dense()));
            let jy = DMatrix::from_row_slice(self.residual_len(), d, &flatten(&self.jacobian(&y).to_dense()));
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let op = (jx - jy).singular_values().max();
            best = best.max(op / dist);
        }
        best * self.settings.lipschitz_safety
    }
}

fn flatten(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

impl NonconvexProblem<f64> for BmiProblem {
    fn dim(&self) -> usize {
        self.ix.dim()
    }

    fn objective(&self) -> &QuadObjective<f64> {
        &self.objective
    }

    fn classes(&self) -> &[ConstraintClass] {
        &self.classes
    }

    fn residual_len(&self) -> usize {
        self.ix.packed()
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        upper(&self.residual_matrix(x))
    }

    fn jacobian(&self, x: &[f64]) -> CscMatrix<f64> {
        CscMatrix::from_triplets(self.residual_len(), self.dim(), &self.jacobian_dense(x))
    }

    fn omega(&self) -> Omega<f64> {
        let ix = self.ix;
        let np = ix.packed();
        let s = &self.settings;
        let mut om = Omega::new(ix.dim());
        let floor =
            svec(&crate::instance::Matrix::identity(ix.n).data, ix.n).into_iter().map(|v| -s.p_floor * v).collect();
        om.push(OmegaBlock {
            coeffs: (0..np).map(|k| (k, ix.p(k), 1.0)).collect(),
            kind: OmegaKind::Psd { side: ix.n, offset: floor },
            tag: None,
        });
        om.push(OmegaBlock {
            coeffs: (0..np).map(|k| (k, ix.s(k), 1.0)).collect(),
            kind: OmegaKind::Psd { side: ix.n, offset: vec![0.0; np] },
            tag: None,
        });
        let f_vars: Vec<usize> = (ix.f(0, 0)..ix.p(0)).collect();
        om.push(OmegaBlock::var_box(&f_vars, vec![-s.f_bound; f_vars.len()], vec![s.f_bound; f_vars.len()]));
        let mut offset = vec![0.0; np + 1];
        offset[0] = s.p_bound;
        om.push(OmegaBlock {
            coeffs: (0..np).map(|k| (k + 1, ix.p(k), 1.0)).collect(),
            kind: OmegaKind::SecondOrder { offset },
            tag: None,
        });
        om.push(OmegaBlock::var_box(&[BmiIndex::T], vec![-s.t_bound], vec![s.t_bound]));
        om
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn layout(&self) -> &VariableLayout {
        &self.layout
    }
}

/// `t⁰ = λ_min((A + Aᵀ)/2)`, `P⁰ = S⁰ = I`, `F⁰ = 0`.
pub fn spectral_start(inst: &BmiInstance) -> Result<Vec<f64>, BmiError> {
    let n = inst.n();
    let t0 = l1gn::subsolver::cones::lambda_min(&inst.a.data, n)?;
    let eye = svec(&crate::instance::Matrix::identity(n).data, n);
    let mut x = vec![t0];
    x.extend(std::iter::repeat_n(0.0, inst.nu() * inst.ny()));
    x.extend_from_slice(&eye);
    x.extend_from_slice(&eye);
    Ok(x)
}
