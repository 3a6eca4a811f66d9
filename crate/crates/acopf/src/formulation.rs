//! The (c, s, θ) reformulation of AC-OPF as a [`NonconvexProblem`].
//!
//! With `c_ii = v_i²`, `c_ij = v_i v_j cos θ_ij` and `s_ij = −v_i v_j sin θ_ij`
//! the power balances and line limits are affine or conic in `(p, q, c, s)`;
//! the nonconvexity is left in two residual classes per branch:
//!
//! * quadratic: `c_ij² + s_ij² − c_ii c_jj`
//! * trigonometric: `sin θ_ij · c_ij + cos θ_ij · s_ij`

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use l1gn::gn::{
    ConstraintClass, NonconvexProblem, Omega, OmegaBlock, OmegaKind, QuadObjective, VarSlice, VariableLayout,
};
use l1gn::linalg::CscMatrix;
use serde::{Deserialize, Serialize};

use crate::admittance::Admittance;
use crate::case::NetworkModel;
use crate::error::OpfError;
use crate::tuning::Tuning;

/// Positions of each variable group in the decision vector
/// `(p, q, c_ii, c_ij, s_ij, θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarIndex {
    pub ng: usize,
    pub nb: usize,
    pub nl: usize,
}

impl VarIndex {
    pub fn p(&self, g: usize) -> usize {
        g
    }
    pub fn q(&self, g: usize) -> usize {
        self.ng + g
    }
    pub fn cii(&self, i: usize) -> usize {
        2 * self.ng + i
    }
    pub fn c(&self, l: usize) -> usize {
        2 * self.ng + self.nb + l
    }
    pub fn s(&self, l: usize) -> usize {
        2 * self.ng + self.nb + self.nl + l
    }
    pub fn theta(&self, i: usize) -> usize {
        2 * self.ng + self.nb + 2 * self.nl + i
    }
    pub fn dim(&self) -> usize {
        2 * self.ng + 2 * self.nb + 2 * self.nl
    }

    pub fn layout(&self) -> VariableLayout {
        let a = 2 * self.ng;
        let b = a + self.nb + 2 * self.nl;
        VariableLayout::new(vec![
            VarSlice { name: "pq".into(), range: 0..a },
            VarSlice { name: "cs".into(), range: a..b },
            VarSlice { name: "theta".into(), range: b..self.dim() },
        ])
        .expect("contiguous slices")
    }
}

/// Slice positions in [`VarIndex::layout`].
pub const SLICE_PQ: usize = 0;
pub const SLICE_CS: usize = 1;
pub const SLICE_THETA: usize = 2;
/// Residual class positions.
pub const CLASS_QUAD: usize = 0;
pub const CLASS_TRIG: usize = 1;

/// A point in the reformulated variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsThetaPoint {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub cii: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
}

impl CsThetaPoint {
    /// Maps bus voltages `(v, θ)` and dispatch `(p, q)` into `(c, s, θ)`.
    pub fn from_polar(model: &NetworkModel, v: &[f64], theta: &[f64], p: &[f64], q: &[f64]) -> Self {
        let idx = model.bus_index();
        let mut c = Vec::with_capacity(model.branches.len());
        let mut s = Vec::with_capacity(model.branches.len());
        for br in &model.branches {
            let (f, t) = (idx[&br.from], idx[&br.to]);
            let th = theta[f] - theta[t];
            c.push(v[f] * v[t] * th.cos());
            s.push(-v[f] * v[t] * th.sin());
        }
        CsThetaPoint {
            p: p.to_vec(),
            q: q.to_vec(),
            cii: v.iter().map(|x| x * x).collect(),
            c,
            s,
            theta: theta.to_vec(),
        }
    }

    /// Flat start: unit voltages, zero angles, dispatch at the box midpoints.
    pub fn flat(model: &NetworkModel) -> Self {
        let nb = model.buses.len();
        let mid = |lo: f64, hi: f64| if lo.is_finite() && hi.is_finite() { 0.5 * (lo + hi) } else { 0.0 };
        let p: Vec<f64> = model.gens.iter().map(|g| mid(g.pmin, g.pmax)).collect();
        let q: Vec<f64> = model.gens.iter().map(|g| mid(g.qmin, g.qmax)).collect();
        Self::from_polar(model, &vec![1.0; nb], &vec![0.0; nb], &p, &q)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [&self.p, &self.q, &self.cii, &self.c, &self.s, &self.theta].iter().flat_map(|v| v.iter().copied()).collect()
    }

    pub fn from_vec(ix: &VarIndex, x: &[f64]) -> Self {
        assert_eq!(x.len(), ix.dim());
        let mut at = 0;
        let mut take = |n: usize| {
            let v = x[at..at + n].to_vec();
            at += n;
            v
        };
        CsThetaPoint {
            p: take(ix.ng),
            q: take(ix.ng),
            cii: take(ix.nb),
            c: take(ix.nl),
            s: take(ix.nl),
            theta: take(ix.nb),
        }
    }
}

/// From and to bus position of each branch.
pub fn branch_ends(model: &NetworkModel) -> Vec<(usize, usize)> {
    let idx = model.bus_index();
    model.branches.iter().map(|br| (idx[&br.from], idx[&br.to])).collect()
}

fn admittance_of(model: &NetworkModel) -> Result<&Admittance, OpfError> {
    model.admittance.as_ref().ok_or_else(|| OpfError::Model("admittance not built".into()))
}

pub fn eval_quadratic_residual(pt: &CsThetaPoint, model: &NetworkModel) -> Vec<f64> {
    branch_ends(model)
        .iter()
        .enumerate()
        .map(|(l, &(f, t))| pt.c[l] * pt.c[l] + pt.s[l] * pt.s[l] - pt.cii[f] * pt.cii[t])
        .collect()
}

pub fn eval_trig_residual(pt: &CsThetaPoint, model: &NetworkModel) -> Vec<f64> {
    branch_ends(model)
        .iter()
        .enumerate()
        .map(|(l, &(f, t))| {
            let th = pt.theta[f] - pt.theta[t];
            th.sin() * pt.c[l] + th.cos() * pt.s[l]
        })
        .collect()
}

/// Jacobians of the quadratic and trigonometric residuals (`nl × d` each).
pub fn jacobians(pt: &CsThetaPoint, model: &NetworkModel) -> (CscMatrix<f64>, CscMatrix<f64>) {
    let ix = VarIndex { ng: pt.p.len(), nb: pt.cii.len(), nl: pt.c.len() };
    let (mut jq, mut jt) = (Vec::new(), Vec::new());
    for (l, &(f, t)) in branch_ends(model).iter().enumerate() {
        jq.push((l, ix.c(l), 2.0 * pt.c[l]));
        jq.push((l, ix.s(l), 2.0 * pt.s[l]));
        jq.push((l, ix.cii(f), -pt.cii[t]));
        jq.push((l, ix.cii(t), -pt.cii[f]));
        let th = pt.theta[f] - pt.theta[t];
        let (sn, cs) = th.sin_cos();
        let dth = cs * pt.c[l] - sn * pt.s[l];
        jt.push((l, ix.c(l), sn));
        jt.push((l, ix.s(l), cs));
        jt.push((l, ix.theta(f), dth));
        jt.push((l, ix.theta(t), -dth));
    }
    let nl = ix.nl;
    (CscMatrix::from_triplets(nl, ix.dim(), &jq), CscMatrix::from_triplets(nl, ix.dim(), &jt))
}

/// Bound on the Lipschitz constant of the residual Jacobian.
pub fn lipschitz_bound(model: &NetworkModel) -> f64 {
    let vmax2 = model.buses.iter().fold(0.0f64, |m, b| m.max(b.vmax * b.vmax));
    (1.0 + 2.0 * vmax2).sqrt().max(2.0)
}

/// Complex power at both ends of every branch, as `(P_f, Q_f, P_t, Q_t)`.
pub fn branch_flows(model: &NetworkModel, pt: &CsThetaPoint) -> Result<Vec<[f64; 4]>, OpfError> {
    let y = admittance_of(model)?;
    Ok(branch_ends(model)
        .iter()
        .enumerate()
        .map(|(l, &(f, t))| {
            flow_terms(&y.branches[l], f, t, l).map(|terms| terms.iter().map(|&(k, a)| a * var_value(pt, k)).sum())
        })
        .collect())
}

/// Which variable a flow coefficient multiplies.
#[derive(Clone, Copy, Debug)]
enum FlowVar {
    Cii(usize),
    C(usize),
    S(usize),
}

fn var_value(pt: &CsThetaPoint, v: FlowVar) -> f64 {
    match v {
        FlowVar::Cii(i) => pt.cii[i],
        FlowVar::C(l) => pt.c[l],
        FlowVar::S(l) => pt.s[l],
    }
}

/// Linear expressions for `P_f, Q_f, P_t, Q_t` of branch `l`.
fn flow_terms(y: &crate::admittance::BranchAdmittance, f: usize, t: usize, l: usize) -> [[(FlowVar, f64); 3]; 4] {
    use FlowVar::*;
    [
        [(Cii(f), y.g_ff), (C(l), y.g_ft), (S(l), -y.b_ft)],
        [(Cii(f), -y.b_ff), (C(l), -y.b_ft), (S(l), -y.g_ft)],
        [(Cii(t), y.g_tt), (C(l), y.g_tf), (S(l), y.b_tf)],
        [(Cii(t), -y.b_tt), (C(l), -y.b_tf), (S(l), y.g_tf)],
    ]
}

fn flow_col(ix: &VarIndex, v: FlowVar) -> usize {
    match v {
        FlowVar::Cii(i) => ix.cii(i),
        FlowVar::C(l) => ix.c(l),
        FlowVar::S(l) => ix.s(l),
    }
}

/// Tag of the line-limit block on one side of branch `l`.
pub fn line_tag(l: usize, to_side: bool) -> u64 {
    2 * l as u64 + to_side as u64
}

/// Angle-difference limits of each branch after normalization: 0 or
/// beyond ±360° means unbounded, and the result is clamped to
/// `±(π/2 − margin)`.
pub fn angle_limits(model: &NetworkModel, margin: f64) -> Vec<(f64, f64)> {
    let cap = FRAC_PI_2 - margin;
    let full = 2.0 * std::f64::consts::PI - 1e-9;
    model
        .branches
        .iter()
        .map(|br| {
            let lo = if br.angmin == 0.0 || br.angmin <= -full { -cap } else { br.angmin.max(-cap) };
            let hi = if br.angmax == 0.0 || br.angmax >= full { cap } else { br.angmax.min(cap) };
            (lo, hi)
        })
        .collect()
}

/// AC-OPF in `(p, q, c, s, θ)`.
#[derive(Clone, Debug)]
pub struct OpfProblem {
    pub model: NetworkModel,
    pub ix: VarIndex,
    pub ends: Vec<(usize, usize)>,
    objective: QuadObjective<f64>,
    classes: Vec<ConstraintClass>,
    layout: VariableLayout,
    lipschitz: f64,
    pub angle_limits: Vec<(f64, f64)>,
    /// Branches whose line-limit blocks are part of the initial `Ω`.
    /// `None` means all limited branches.
    pub initial_lines: Option<Vec<usize>>,
    pub lazy_margin: f64,
    /// Objective is divided by this before optimization.
    pub cost_scale: f64,
}

/// Builds the reformulated problem. With `tuning.lazy` the line limits start
/// empty; seed them with [`OpfProblem::with_lines`].
pub fn build_problem(model: &NetworkModel, tuning: &Tuning) -> Result<OpfProblem, OpfError> {
    model.validate()?;
    admittance_of(model)?;
    for b in &model.buses {
        if b.vmin < 0.0 {
            return Err(OpfError::Model(format!("bus {}: negative Vmin", b.id)));
        }
    }
    let cost_scale = tuning.cost_scale.unwrap_or(1.0);
    if !(cost_scale > 0.0) || !cost_scale.is_finite() {
        return Err(OpfError::Model("cost scale must be positive".into()));
    }
    let ix = VarIndex { ng: model.gens.len(), nb: model.buses.len(), nl: model.branches.len() };
    let objective = scaled_objective(model, &ix, cost_scale);
    let nl = ix.nl;
    let classes = vec![
        ConstraintClass { name: "quadratic".into(), rows: 0..nl },
        ConstraintClass { name: "trigonometric".into(), rows: nl..2 * nl },
    ];
    Ok(OpfProblem {
        model: model.clone(),
        ix,
        ends: branch_ends(model),
        objective,
        classes,
        layout: ix.layout(),
        lipschitz: lipschitz_bound(model),
        angle_limits: angle_limits(model, tuning.angle_margin),
        initial_lines: if tuning.lazy { Some(Vec::new()) } else { None },
        lazy_margin: tuning.lazy_margin,
        cost_scale,
    })
}

fn scaled_objective(model: &NetworkModel, ix: &VarIndex, scale: f64) -> QuadObjective<f64> {
    let base = model.base_mva;
    let mut objective = QuadObjective::zero(ix.dim());
    for (g, gen) in model.gens.iter().enumerate() {
        objective.hess_diag[ix.p(g)] = 2.0 * gen.cost.c2 * base * base / scale;
        objective.linear[ix.p(g)] = gen.cost.c1 * base / scale;
    }
    objective
}

impl OpfProblem {
    pub fn with_lines(mut self, lines: Vec<usize>) -> Self {
        self.initial_lines = Some(lines);
        self
    }

    /// Same problem with the objective divided by `scale` instead.
    pub fn with_cost_scale(mut self, scale: f64) -> Self {
        self.objective = scaled_objective(&self.model, &self.ix, scale);
        self.cost_scale = scale;
        self
    }

    pub fn is_lazy(&self) -> bool {
        self.initial_lines.is_some()
    }

    pub fn point(&self, x: &[f64]) -> CsThetaPoint {
        CsThetaPoint::from_vec(&self.ix, x)
    }

    /// Generation cost in $/h including the constant terms.
    pub fn cost(&self, pt: &CsThetaPoint) -> f64 {
        generation_cost(&self.model, &pt.p)
    }

    pub fn reference_bus(&self) -> usize {
        self.model.reference_bus()
    }

    /// Power balance rows `(P, Q)` for every bus as one Equal block.
    fn balance_block(&self) -> OmegaBlock<f64> {
        let ix = &self.ix;
        let y = self.model.admittance.as_ref().expect("admittance checked in build_problem");
        let idx = self.model.bus_index();
        let nb = ix.nb;
        let mut coeffs = Vec::new();
        let mut rhs = vec![0.0; 2 * nb];
        for (i, b) in self.model.buses.iter().enumerate() {
            rhs[i] = b.pd;
            rhs[nb + i] = b.qd;
            coeffs.push((i, ix.cii(i), -b.gs));
            coeffs.push((nb + i, ix.cii(i), b.bs));
        }
        for (g, gen) in self.model.gens.iter().enumerate() {
            let i = idx[&gen.bus];
            coeffs.push((i, ix.p(g), 1.0));
            coeffs.push((nb + i, ix.q(g), 1.0));
        }
        for (l, &(f, t)) in self.ends.iter().enumerate() {
            let terms = flow_terms(&y.branches[l], f, t, l);
            for (side, bus) in [(0, f), (2, t)] {
                for &(v, a) in &terms[side] {
                    coeffs.push((bus, flow_col(ix, v), -a));
                }
                for &(v, a) in &terms[side + 1] {
                    coeffs.push((nb + bus, flow_col(ix, v), -a));
                }
            }
        }
        OmegaBlock { coeffs, kind: OmegaKind::Equal { rhs }, tag: None }
    }

    /// `‖(P, Q)‖ ≤ S̄` on one side of branch `l`.
    fn line_block(&self, l: usize, to_side: bool) -> OmegaBlock<f64> {
        let y = self.model.admittance.as_ref().expect("admittance checked in build_problem");
        let (f, t) = self.ends[l];
        let terms = flow_terms(&y.branches[l], f, t, l);
        let k = if to_side { 2 } else { 0 };
        let mut coeffs = Vec::with_capacity(6);
        for (row, side) in [(1, k), (2, k + 1)] {
            for &(v, a) in &terms[side] {
                coeffs.push((row, flow_col(&self.ix, v), a));
            }
        }
        let rate = self.model.branches[l].rate_a;
        OmegaBlock {
            coeffs,
            kind: OmegaKind::SecondOrder { offset: vec![rate, 0.0, 0.0] },
            tag: Some(line_tag(l, to_side)),
        }
    }

    fn push_lines(&self, omega: &mut Omega<f64>, l: usize) {
        omega.push(self.line_block(l, false));
        omega.push(self.line_block(l, true));
    }

    pub fn limited_lines(&self) -> impl Iterator<Item = usize> + '_ {
        self.model.branches.iter().enumerate().filter(|(_, b)| b.rate_a > 0.0).map(|(l, _)| l)
    }

    /// `Ω` without any θ block, in the first `d − nb` coordinates.
    pub fn omega_without_theta(&self, lines: Option<&[usize]>) -> Omega<f64> {
        let ix = &self.ix;
        let mut om = Omega::new(ix.dim());
        om.push(self.balance_block());
        match lines {
            Some(set) => {
                for &l in set {
                    if self.model.branches[l].rate_a > 0.0 {
                        self.push_lines(&mut om, l);
                    }
                }
            }
            None => {
                for l in self.limited_lines().collect::<Vec<_>>() {
                    self.push_lines(&mut om, l);
                }
            }
        }
        let gens = &self.model.gens;
        let pq: Vec<usize> = (0..ix.ng).map(|g| ix.p(g)).chain((0..ix.ng).map(|g| ix.q(g))).collect();
        let lo = gens.iter().map(|g| g.pmin).chain(gens.iter().map(|g| g.qmin)).collect();
        let hi = gens.iter().map(|g| g.pmax).chain(gens.iter().map(|g| g.qmax)).collect();
        om.push(OmegaBlock::var_box(&pq, lo, hi));
        let buses = &self.model.buses;
        let cii: Vec<usize> = (0..ix.nb).map(|i| ix.cii(i)).collect();
        om.push(OmegaBlock::var_box(
            &cii,
            buses.iter().map(|b| b.vmin * b.vmin).collect(),
            buses.iter().map(|b| b.vmax * b.vmax).collect(),
        ));
        // Implied by c_ij = v_i v_j cos θ_ij with |θ_ij| < π/2 and the voltage
        // limits; keeps Ω bounded.
        let vv: Vec<f64> = self.ends.iter().map(|&(f, t)| buses[f].vmax * buses[t].vmax).collect();
        let cs: Vec<usize> = (0..ix.nl).map(|l| ix.c(l)).chain((0..ix.nl).map(|l| ix.s(l))).collect();
        let lo = vv.iter().map(|_| 0.0).chain(vv.iter().map(|v| -v)).collect();
        let hi = vv.iter().chain(vv.iter()).copied().collect();
        om.push(OmegaBlock::var_box(&cs, lo, hi));
        om
    }

    /// Angle-difference boxes and the reference pin.
    pub fn theta_blocks(&self) -> Vec<OmegaBlock<f64>> {
        let ix = &self.ix;
        let mut coeffs = Vec::with_capacity(2 * ix.nl);
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for (l, &(f, t)) in self.ends.iter().enumerate() {
            coeffs.push((l, ix.theta(f), 1.0));
            coeffs.push((l, ix.theta(t), -1.0));
            lo.push(self.angle_limits[l].0);
            hi.push(self.angle_limits[l].1);
        }
        vec![
            OmegaBlock { coeffs, kind: OmegaKind::Box { lo, hi }, tag: None },
            OmegaBlock {
                coeffs: vec![(0, ix.theta(self.reference_bus()), 1.0)],
                kind: OmegaKind::Equal { rhs: vec![0.0] },
                tag: None,
            },
        ]
    }

    /// Apparent power at the worse end of each branch.
    pub fn flow_magnitudes(&self, pt: &CsThetaPoint) -> Vec<f64> {
        branch_flows(&self.model, pt)
            .expect("admittance checked in build_problem")
            .iter()
            .map(|f| f[0].hypot(f[1]).max(f[2].hypot(f[3])))
            .collect()
    }
}

/// Generation cost in $/h of a per-unit dispatch, constant terms included.
pub fn generation_cost(model: &NetworkModel, p: &[f64]) -> f64 {
    model
        .gens
        .iter()
        .zip(p)
        .map(|(g, &pg)| {
            let mw = pg * model.base_mva;
            g.cost.c2 * mw * mw + g.cost.c1 * mw + g.cost.c0
        })
        .sum()
}

/// Branches with a limit whose flow at `pt` exceeds `(1 − margin)·S̄` on
/// either side.
pub fn active_line_set(problem: &OpfProblem, pt: &CsThetaPoint, margin: f64) -> Vec<usize> {
    let mags = problem.flow_magnitudes(pt);
    problem.limited_lines().filter(|&l| mags[l] > (1.0 - margin) * problem.model.branches[l].rate_a).collect()
}

impl NonconvexProblem<f64> for OpfProblem {
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
        2 * self.ix.nl
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let pt = self.point(x);
        let mut r = eval_quadratic_residual(&pt, &self.model);
        r.extend(eval_trig_residual(&pt, &self.model));
        r
    }

    fn jacobian(&self, x: &[f64]) -> CscMatrix<f64> {
        let (jq, jt) = jacobians(&self.point(x), &self.model);
        CscMatrix::vstack(&[&jq, &jt])
    }

    fn omega(&self) -> Omega<f64> {
        let mut om = self.omega_without_theta(self.initial_lines.as_deref());
        for b in self.theta_blocks() {
            om.push(b);
        }
        om
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    /// Lazy mode only: when a branch outside `Ω` is overloaded at `x`, adds
    /// every near-binding branch outside `Ω`.
    fn separate(&self, x: &[f64], omega: &mut Omega<f64>) -> usize {
        if !self.is_lazy() {
            return 0;
        }
        let present: HashSet<u64> = omega.blocks.iter().filter_map(|b| b.tag).collect();
        let mags = self.flow_magnitudes(&self.point(x));
        let outside: Vec<usize> = self.limited_lines().filter(|&l| !present.contains(&line_tag(l, false))).collect();
        let rate = |l: usize| self.model.branches[l].rate_a;
        if !outside.iter().any(|&l| mags[l] > rate(l) * (1.0 + 1e-6)) {
            return 0;
        }
        let mut added = 0;
        for l in outside {
            if mags[l] > (1.0 - self.lazy_margin) * rate(l) {
                self.push_lines(omega, l);
                added += 1;
            }
        }
        added
    }
}
