use std::ops::Range;

use crate::linalg::CscMatrix;
use crate::subsolver::RowKind;
use crate::{Error, Scalar};

/// Named contiguous slice of the decision vector. Regularization weights are
/// set per slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSlice {
    pub name: String,
    pub range: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableLayout {
    slices: Vec<VarSlice>,
    dim: usize,
}

impl VariableLayout {
    /// Slices must be given in order and tile `0..dim` without gaps.
    pub fn new(slices: Vec<VarSlice>) -> Result<Self, Error> {
        let mut next = 0;
        for s in &slices {
            if s.range.start != next || s.range.end < s.range.start {
                return Err(Error::Invalid(format!("slice '{}' does not continue at index {next}", s.name)));
            }
            next = s.range.end;
        }
        Ok(VariableLayout { slices, dim: next })
    }

    /// Layout with a single slice named `x`.
    pub fn single(dim: usize) -> Self {
        VariableLayout { slices: vec![VarSlice { name: "x".into(), range: 0..dim }], dim }
    }

    pub fn slices(&self) -> &[VarSlice] {
        &self.slices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.slices.iter().position(|s| s.name == name)
    }

    /// Expands per-slice values to one value per variable.
    pub fn expand<T: Scalar>(&self, per_slice: &[T]) -> Vec<T> {
        assert_eq!(per_slice.len(), self.slices.len());
        let mut out = vec![T::zero(); self.dim];
        for (s, &v) in self.slices.iter().zip(per_slice) {
            out[s.range.clone()].iter_mut().for_each(|o| *o = v);
        }
        out
    }
}

/// Group of residual rows sharing one penalty weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintClass {
    pub name: String,
    pub rows: Range<usize>,
}

/// `f(x) = ½ Σ hᵢ xᵢ² + gᵀx + constant` with `h ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadObjective<T> {
    pub hess_diag: Vec<T>,
    pub linear: Vec<T>,
    pub constant: T,
}

impl<T: Scalar> QuadObjective<T> {
    pub fn zero(dim: usize) -> Self {
        QuadObjective { hess_diag: vec![T::zero(); dim], linear: vec![T::zero(); dim], constant: T::zero() }
    }

    pub fn value(&self, x: &[T]) -> T {
        let half = T::of(0.5);
        x.iter()
            .zip(self.hess_diag.iter().zip(&self.linear))
            .fold(self.constant, |s, (&xi, (&h, &g))| s + half * h * xi * xi + g * xi)
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(self.hess_diag.iter().zip(&self.linear)).map(|(&xi, (&h, &g))| h * xi + g).collect()
    }
}

/// Constraint type of one block of `Ω`, acting on `v = M x` for the block's
/// coefficient matrix `M`.
#[derive(Clone, Debug, PartialEq)]
pub enum OmegaKind<T> {
    Equal {
        rhs: Vec<T>,
    },
    Box {
        lo: Vec<T>,
        hi: Vec<T>,
    },
    /// `v + offset` in the second-order cone.
    SecondOrder {
        offset: Vec<T>,
    },
    /// `v + offset` packed PSD matrix of order `side`.
    Psd {
        side: usize,
        offset: Vec<T>,
    },
}

impl<T: Scalar> OmegaKind<T> {
    pub fn len(&self) -> usize {
        match self {
            OmegaKind::Equal { rhs } => rhs.len(),
            OmegaKind::Box { lo, .. } => lo.len(),
            OmegaKind::SecondOrder { offset } | OmegaKind::Psd { offset, .. } => offset.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn to_row_kind(&self) -> RowKind<T> {
        match self {
            OmegaKind::Equal { rhs } => RowKind::Zero { rhs: rhs.clone() },
            OmegaKind::Box { lo, hi } => RowKind::Box { lo: lo.clone(), hi: hi.clone() },
            OmegaKind::SecondOrder { offset } => RowKind::SecondOrder { offset: offset.clone() },
            OmegaKind::Psd { side, offset } => RowKind::Psd { side: *side, offset: offset.clone() },
        }
    }
}

/// One convex block of `Ω`: `kind` applied to the rows `M x`, where `M` is
/// given by `(row, column, value)` triplets local to the block.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaBlock<T> {
    pub coeffs: Vec<(usize, usize, T)>,
    pub kind: OmegaKind<T>,
    /// Frontend label, used to avoid adding a lazily generated block twice.
    pub tag: Option<u64>,
}

impl<T: Scalar> OmegaBlock<T> {
    /// Bounds on individual variables.
    pub fn var_box(vars: &[usize], lo: Vec<T>, hi: Vec<T>) -> Self {
        let coeffs = vars.iter().enumerate().map(|(r, &c)| (r, c, T::one())).collect();
        OmegaBlock { coeffs, kind: OmegaKind::Box { lo, hi }, tag: None }
    }

    pub fn with_tag(mut self, tag: u64) -> Self {
        self.tag = Some(tag);
        self
    }

    fn rows_of(&self, x: &[T]) -> Vec<T> {
        let mut v = vec![T::zero(); self.kind.len()];
        for &(r, c, a) in &self.coeffs {
            v[r] = v[r] + a * x[c];
        }
        v
    }
}

/// Convex feasible region as an ordered list of blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Omega<T> {
    pub dim: usize,
    pub blocks: Vec<OmegaBlock<T>>,
}

impl<T: Scalar> Omega<T> {
    pub fn new(dim: usize) -> Self {
        Omega { dim, blocks: Vec::new() }
    }

    pub fn push(&mut self, block: OmegaBlock<T>) {
        self.blocks.push(block);
    }

    pub fn has_tag(&self, tag: u64) -> bool {
        self.blocks.iter().any(|b| b.tag == Some(tag))
    }

    pub fn rows(&self) -> usize {
        self.blocks.iter().map(|b| b.kind.len()).sum()
    }

    /// Stacked coefficient matrix and block kinds, ready to be placed in a
    /// [`crate::subsolver::ConicProgram`].
    pub fn to_rows(&self) -> Result<(CscMatrix<T>, Vec<RowKind<T>>), Error> {
        let mut trip = Vec::new();
        let mut off = 0;
        let mut kinds = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let len = b.kind.len();
            for &(r, c, v) in &b.coeffs {
                if r >= len || c >= self.dim {
                    return Err(Error::Dimension(format!("Ω coefficient ({r},{c}) outside block of {len} rows")));
                }
                trip.push((off + r, c, v));
            }
            off += len;
            kinds.push(b.kind.to_row_kind());
        }
        Ok((CscMatrix::from_triplets(off, self.dim, &trip), kinds))
    }

    /// Largest violation over all blocks at `x`.
    pub fn violation(&self, x: &[T]) -> T {
        self.blocks.iter().fold(T::zero(), |m, b| m.max(b.kind.to_row_kind().violation(&b.rows_of(x))))
    }

    /// Lower/upper bound of each variable implied by single-variable box rows
    /// (±∞ when unbounded).
    pub fn variable_bounds(&self) -> (Vec<T>, Vec<T>) {
        let mut lo = vec![T::neg_infinity(); self.dim];
        let mut hi = vec![T::infinity(); self.dim];
        for b in &self.blocks {
            if let OmegaKind::Box { lo: l, hi: h } = &b.kind {
                let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); l.len()];
                for &(r, c, v) in &b.coeffs {
                    per_row[r].push((c, v));
                }
                for (r, entries) in per_row.iter().enumerate() {
                    if let [(c, a)] = entries[..] {
                        if a > T::zero() {
                            lo[c] = lo[c].max(l[r] / a);
                            hi[c] = hi[c].min(h[r] / a);
                        } else if a < T::zero() {
                            lo[c] = lo[c].max(h[r] / a);
                            hi[c] = hi[c].min(l[r] / a);
                        }
                    }
                }
            }
        }
        (lo, hi)
    }
}

/// Nonconvex program `min f(x) s.t. Ψ(x) = 0, x ∈ Ω`.
///
/// Implementations must be immutable after construction; the Jacobian
/// sparsity pattern must not depend on `x` (store explicit zeros).
pub trait NonconvexProblem<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn objective(&self) -> &QuadObjective<T>;
    fn classes(&self) -> &[ConstraintClass];
    fn residual_len(&self) -> usize;
    fn residual(&self, x: &[T]) -> Vec<T>;
    fn jacobian(&self, x: &[T]) -> CscMatrix<T>;
    /// `Ω` at the start of a solve.
    fn omega(&self) -> Omega<T>;
    /// Lipschitz constant of the Jacobian, if known.
    fn lipschitz(&self) -> Option<T>;
    fn layout(&self) -> &VariableLayout;
    /// Adds blocks of `Ω` that were left out and are violated (or nearly so)
    /// at `x`. Returns how many were added.
    fn separate(&self, _x: &[T], _omega: &mut Omega<T>) -> usize {
        0
    }
}

/// Checks the structural invariants of a problem definition.
pub fn validate_problem<T: Scalar, P: NonconvexProblem<T> + ?Sized>(p: &P, x: &[T]) -> Result<(), Error> {
    let d = p.dim();
    if x.len() != d {
        return Err(Error::Dimension(format!("point has {} entries, problem has {d}", x.len())));
    }
    if p.layout().dim() != d {
        return Err(Error::Dimension("variable layout does not cover the decision vector".into()));
    }
    let obj = p.objective();
    if obj.hess_diag.len() != d || obj.linear.len() != d {
        return Err(Error::Dimension("objective size differs from problem dimension".into()));
    }
    if obj.hess_diag.iter().any(|&h| h < T::zero()) {
        return Err(Error::Invalid("objective Hessian has a negative entry".into()));
    }
    let n = p.residual_len();
    let mut next = 0;
    for c in p.classes() {
        if c.rows.start != next {
            return Err(Error::Invalid(format!("class '{}' does not continue at row {next}", c.name)));
        }
        next = c.rows.end;
    }
    if next != n {
        return Err(Error::Dimension("constraint classes do not cover the residual".into()));
    }
    let j = p.jacobian(x);
    if j.nrows != n || j.ncols != d {
        return Err(Error::Dimension(format!("Jacobian is {}x{}, expected {n}x{d}", j.nrows, j.ncols)));
    }
    if p.residual(x).len() != n {
        return Err(Error::Dimension("residual length differs from residual_len".into()));
    }
    Ok(())
}
