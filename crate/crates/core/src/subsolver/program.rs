use crate::linalg::{vecops, CscMatrix};
use crate::subsolver::cones;
use crate::{Error, Scalar};

/// What a contiguous range of rows of `A` is constrained to.
///
/// Every row of `A` belongs to exactly one block. With `v = A x` restricted to
/// the block rows:
#[derive(Clone, Debug, PartialEq)]
pub enum RowKind<T> {
    /// `v = rhs`
    Zero { rhs: Vec<T> },
    /// `lo ≤ v ≤ hi`
    Box { lo: Vec<T>, hi: Vec<T> },
    /// `v + offset` in the second-order cone, first entry is the scalar part.
    SecondOrder { offset: Vec<T> },
    /// `v + offset` packed (see [`cones::svec`]) PSD matrix of order `side`.
    Psd { side: usize, offset: Vec<T> },
    /// Objective term `Σ weightᵢ |vᵢ + offsetᵢ|`.
    L1 { weight: Vec<T>, offset: Vec<T> },
}

impl<T: Scalar> RowKind<T> {
    pub fn len(&self) -> usize {
        match self {
            RowKind::Zero { rhs } => rhs.len(),
            RowKind::Box { lo, .. } => lo.len(),
            RowKind::SecondOrder { offset } => offset.len(),
            RowKind::Psd { offset, .. } => offset.len(),
            RowKind::L1 { weight, .. } => weight.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self) -> &'static str {
        match self {
            RowKind::Zero { .. } => "zero",
            RowKind::Box { .. } => "box",
            RowKind::SecondOrder { .. } => "soc",
            RowKind::Psd { .. } => "psd",
            RowKind::L1 { .. } => "l1",
        }
    }

    /// Distance-like violation of the block at `v` (zero for L1 rows).
    pub fn violation(&self, v: &[T]) -> T {
        match self {
            RowKind::Zero { rhs } => vecops::dist_inf(v, rhs),
            RowKind::Box { lo, hi } => {
                v.iter().zip(lo.iter().zip(hi)).fold(T::zero(), |m, (&x, (&l, &h))| m.max(l - x).max(x - h))
            }
            RowKind::SecondOrder { offset } => {
                let w: Vec<T> = v.iter().zip(offset).map(|(&a, &b)| a + b).collect();
                vecops::dist_inf(&w, &cones::project_soc(&w))
            }
            RowKind::Psd { side, offset } => {
                let w: Vec<T> = v.iter().zip(offset).map(|(&a, &b)| a + b).collect();
                let mut p = w.clone();
                match cones::project_psd_svec_in_place(&mut p, *side) {
                    Ok(()) => vecops::dist_inf(&w, &p),
                    Err(_) => T::infinity(),
                }
            }
            RowKind::L1 { .. } => T::zero(),
        }
    }

    /// Value of the block's objective contribution at `v`.
    pub fn penalty(&self, v: &[T]) -> T {
        match self {
            RowKind::L1 { weight, offset } => {
                v.iter().zip(weight.iter().zip(offset)).fold(T::zero(), |s, (&x, (&w, &r))| s + w * (x + r).abs())
            }
            _ => T::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowBlock<T> {
    pub start: usize,
    pub kind: RowKind<T>,
}

impl<T: Scalar> RowBlock<T> {
    pub fn rows(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.kind.len()
    }
}

/// `minimize ½xᵀPx + qᵀx + constant + Σ_L1 w|Ax + r|  subject to the row blocks`.
///
/// `p` stores the upper triangle only.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram<T> {
    pub p: CscMatrix<T>,
    pub q: Vec<T>,
    pub constant: T,
    pub a: CscMatrix<T>,
    pub blocks: Vec<RowBlock<T>>,
}

impl<T: Scalar> ConicProgram<T> {
    /// Creates a program, assigning block row offsets in order.
    pub fn new(
        p: CscMatrix<T>,
        q: Vec<T>,
        constant: T,
        a: CscMatrix<T>,
        kinds: Vec<RowKind<T>>,
    ) -> Result<Self, Error> {
        let mut blocks = Vec::with_capacity(kinds.len());
        let mut start = 0;
        for kind in kinds {
            let len = kind.len();
            blocks.push(RowBlock { start, kind });
            start += len;
        }
        let prog = ConicProgram { p, q, constant, a, blocks };
        prog.validate()?;
        Ok(prog)
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn m(&self) -> usize {
        self.a.nrows
    }

    pub fn validate(&self) -> Result<(), Error> {
        let n = self.n();
        if self.p.nrows != n || self.p.ncols != n {
            return Err(Error::Dimension(format!("P is {}x{}, expected {n}x{n}", self.p.nrows, self.p.ncols)));
        }
        for j in 0..n {
            if self.p.rowval[self.p.colptr[j]..self.p.colptr[j + 1]].iter().any(|&i| i > j) {
                return Err(Error::Invalid("P must store its upper triangle only".into()));
            }
        }
        if self.a.ncols != n {
            return Err(Error::Dimension(format!("A has {} columns, expected {n}", self.a.ncols)));
        }
        let mut next = 0;
        for b in &self.blocks {
            if b.start != next {
                return Err(Error::Invalid("row blocks must tile the rows of A in order".into()));
            }
            next += b.kind.len();
            match &b.kind {
                RowKind::Box { lo, hi } => {
                    if lo.len() != hi.len() {
                        return Err(Error::Dimension("box bounds differ in length".into()));
                    }
                    if let Some(i) = lo.iter().zip(hi).position(|(l, h)| !(l <= h)) {
                        return Err(Error::Invalid(format!("empty box at row {}", b.start + i)));
                    }
                }
                RowKind::Psd { side, offset } => {
                    if cones::svec_len(*side) != offset.len() {
                        return Err(Error::Dimension(format!(
                            "PSD block of side {side} needs {} rows, has {}",
                            cones::svec_len(*side),
                            offset.len()
                        )));
                    }
                }
                RowKind::L1 { weight, offset } => {
                    if weight.len() != offset.len() {
                        return Err(Error::Dimension("L1 weights and offsets differ in length".into()));
                    }
                    if weight.iter().any(|&w| w < T::zero()) {
                        return Err(Error::Invalid("negative L1 weight".into()));
                    }
                }
                RowKind::SecondOrder { offset } => {
                    if offset.is_empty() {
                        return Err(Error::Invalid("empty second-order cone".into()));
                    }
                }
                RowKind::Zero { .. } => {}
            }
        }
        if next != self.m() {
            return Err(Error::Dimension(format!("blocks cover {next} rows, A has {}", self.m())));
        }
        Ok(())
    }

    pub fn smooth_objective(&self, x: &[T]) -> T {
        let mut px = vec![T::zero(); self.n()];
        self.p.sym_upper_mul_vec_into(x, &mut px, false);
        T::of(0.5) * vecops::dot(x, &px) + vecops::dot(&self.q, x) + self.constant
    }

    /// Full objective including the L1 rows.
    pub fn objective(&self, x: &[T]) -> T {
        let ax = self.a.mul_vec(x);
        self.smooth_objective(x) + self.blocks.iter().fold(T::zero(), |s, b| s + b.kind.penalty(&ax[b.rows()]))
    }

    /// Largest constraint violation over all non-L1 blocks.
    pub fn violation(&self, x: &[T]) -> T {
        let ax = self.a.mul_vec(x);
        self.blocks.iter().fold(T::zero(), |m, b| m.max(b.kind.violation(&ax[b.rows()])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_box() {
        let r = ConicProgram::new(
            CscMatrix::<f64>::identity(1),
            vec![0.0],
            0.0,
            CscMatrix::identity(1),
            vec![RowKind::Box { lo: vec![2.0], hi: vec![1.0] }],
        );
        assert!(matches!(r, Err(Error::Invalid(_))));
    }

    #[test]
    fn objective_includes_l1_rows() {
        let prog = ConicProgram::new(
            CscMatrix::<f64>::identity(1),
            vec![1.0],
            3.0,
            CscMatrix::from_dense(&[vec![2.0]]),
            vec![RowKind::L1 { weight: vec![4.0], offset: vec![-1.0] }],
        )
        .unwrap();
        // 0.5 + 1 + 3 + 4|2 - 1|
        assert_eq!(prog.objective(&[1.0]), 8.5);
    }
}
