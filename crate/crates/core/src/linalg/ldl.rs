//! Sparse LDLᵀ factorization for symmetric quasi-definite matrices.
//!
//! Up-looking elimination in the style of QDLDL. The fill-reducing ordering
//! comes from the `amd` crate; everything after the ordering (elimination
//! tree, column counts, numeric factorization, triangular solves) lives here.
//! The symbolic part depends only on the sparsity pattern and is reused
//! whenever the numeric values change but the pattern does not.

use std::sync::Arc;

use crate::linalg::CscMatrix;
use crate::{Error, Scalar};

const NONE: usize = usize::MAX;

/// Ordering and elimination structure of one sparsity pattern.
#[derive(Debug)]
pub struct LdlSymbolic {
    n: usize,
    /// `perm[k]` is the original index eliminated at step `k`.
    perm: Vec<usize>,
    /// Upper-triangular pattern of the permuted matrix.
    cp: Vec<usize>,
    ci: Vec<usize>,
    /// Position in the permuted storage of every entry of the input.
    map: Vec<usize>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    /// Pattern the symbolic object was built for, kept for reuse checks.
    pattern_colptr: Vec<usize>,
    pattern_rowval: Vec<usize>,
}

impl LdlSymbolic {
    /// Analyses the upper triangle of a symmetric matrix. Every column must
    /// store its diagonal entry.
    pub fn analyze<T: Scalar>(upper: &CscMatrix<T>) -> Result<Self, Error> {
        let n = upper.ncols;
        if upper.nrows != n {
            return Err(Error::Dimension(format!("LDL needs a square matrix, got {}x{}", upper.nrows, n)));
        }
        for j in 0..n {
            let col = &upper.rowval[upper.colptr[j]..upper.colptr[j + 1]];
            if col.iter().any(|&i| i > j) {
                return Err(Error::Dimension("LDL input must be upper triangular".into()));
            }
            if col.last() != Some(&j) {
                return Err(Error::Dimension(format!("LDL input lacks diagonal entry {j}")));
            }
        }
        let perm = if n == 0 {
            Vec::new()
        } else {
            let ap: Vec<i64> = upper.colptr.iter().map(|&v| v as i64).collect();
            let ai: Vec<i64> = upper.rowval.iter().map(|&v| v as i64).collect();
            let (p, _, _) = amd::order(n as i64, &ap, &ai, &amd::Control::default())
                .map_err(|s| Error::Factorization(format!("AMD ordering failed: {s:?}")))?;
            p.into_iter().map(|v| v as usize).collect()
        };
        let mut iperm = vec![0usize; n];
        for (k, &i) in perm.iter().enumerate() {
            iperm[i] = k;
        }

        // Permute: entry (i, j), i <= j, lands at (min, max) of (iperm[i], iperm[j]).
        let nnz = upper.nnz();
        let mut count = vec![0usize; n + 1];
        for j in 0..n {
            for p in upper.colptr[j]..upper.colptr[j + 1] {
                let (a, b) = (iperm[upper.rowval[p]], iperm[j]);
                count[a.max(b) + 1] += 1;
            }
        }
        for j in 0..n {
            count[j + 1] += count[j];
        }
        let cp = count.clone();
        let mut next = count;
        let mut ci = vec![0usize; nnz];
        let mut map = vec![0usize; nnz];
        for j in 0..n {
            for p in upper.colptr[j]..upper.colptr[j + 1] {
                let (a, b) = (iperm[upper.rowval[p]], iperm[j]);
                let col = a.max(b);
                let q = next[col];
                ci[q] = a.min(b);
                map[p] = q;
                next[col] += 1;
            }
        }

        // Elimination tree and column counts of L.
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for p in cp[j]..cp[j + 1] {
                let mut i = ci[p];
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        Ok(LdlSymbolic {
            n,
            perm,
            cp,
            ci,
            map,
            etree,
            lp,
            pattern_colptr: upper.colptr.clone(),
            pattern_rowval: upper.rowval.clone(),
        })
    }

    pub fn matches<T: Scalar>(&self, upper: &CscMatrix<T>) -> bool {
        upper.ncols == self.n && upper.colptr == self.pattern_colptr && upper.rowval == self.pattern_rowval
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_l(&self) -> usize {
        self.lp[self.n]
    }
}

/// Numeric factors `P A Pᵀ = L D Lᵀ`.
#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    sym: Arc<LdlSymbolic>,
    li: Vec<usize>,
    lx: Vec<T>,
    d: Vec<T>,
    dinv: Vec<T>,
    work: Vec<T>,
}

impl<T: Scalar> LdlFactor<T> {
    /// Numeric factorization of a matrix whose pattern matches `sym`.
    pub fn factor(sym: Arc<LdlSymbolic>, upper: &CscMatrix<T>) -> Result<Self, Error> {
        if !sym.matches(upper) {
            return Err(Error::Factorization("pattern differs from symbolic analysis".into()));
        }
        let n = sym.n;
        let mut cx = vec![T::zero(); upper.nnz()];
        for (p, &q) in sym.map.iter().enumerate() {
            cx[q] = upper.nzval[p];
        }
        let (cp, ci, lp, etree) = (&sym.cp, &sym.ci, &sym.lp, &sym.etree);
        let mut li = vec![0usize; lp[n]];
        let mut lx = vec![T::zero(); lp[n]];
        let mut d = vec![T::zero(); n];
        let mut dinv = vec![T::zero(); n];
        let mut y = vec![T::zero(); n];
        let mut marked = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = lp[..n].to_vec();

        for k in 0..n {
            let mut nnz_y = 0;
            for p in cp[k]..cp[k + 1] {
                let b = ci[p];
                if b == k {
                    d[k] = cx[p];
                    continue;
                }
                y[b] = cx[p];
                if !marked[b] {
                    marked[b] = true;
                    elim[0] = b;
                    let mut ne = 1;
                    let mut nx = etree[b];
                    while nx != NONE && nx < k {
                        if marked[nx] {
                            break;
                        }
                        marked[nx] = true;
                        elim[ne] = nx;
                        ne += 1;
                        nx = etree[nx];
                    }
                    while ne > 0 {
                        ne -= 1;
                        y_idx[nnz_y] = elim[ne];
                        nnz_y += 1;
                    }
                }
            }
            for t in (0..nnz_y).rev() {
                let c = y_idx[t];
                let tmp = next_space[c];
                let yc = y[c];
                for j in lp[c]..tmp {
                    y[li[j]] = y[li[j]] - lx[j] * yc;
                }
                li[tmp] = k;
                lx[tmp] = yc * dinv[c];
                d[k] = d[k] - yc * lx[tmp];
                next_space[c] += 1;
                y[c] = T::zero();
                marked[c] = false;
            }
            if d[k] == T::zero() || !d[k].is_finite() {
                return Err(Error::Factorization(format!("zero or non-finite pivot at step {k}")));
            }
            dinv[k] = T::one() / d[k];
        }
        Ok(LdlFactor { sym, li, lx, d, dinv, work: vec![T::zero(); n] })
    }

    pub fn symbolic(&self) -> &Arc<LdlSymbolic> {
        &self.sym
    }

    /// Number of positive pivots; equals the size of the positive-definite
    /// block for a quasi-definite matrix.
    pub fn positive_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v > T::zero()).count()
    }

    /// Solves `A x = b` in place.
    pub fn solve(&mut self, b: &mut [T]) {
        let n = self.sym.n;
        assert_eq!(b.len(), n);
        let perm = &self.sym.perm;
        let lp = &self.sym.lp;
        let x = &mut self.work;
        for k in 0..n {
            x[k] = b[perm[k]];
        }
        for i in 0..n {
            let xi = x[i];
            for j in lp[i]..lp[i + 1] {
                x[self.li[j]] = x[self.li[j]] - self.lx[j] * xi;
            }
        }
        for i in 0..n {
            x[i] = x[i] * self.dinv[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in lp[i]..lp[i + 1] {
                s = s - self.lx[j] * x[self.li[j]];
            }
            x[i] = s;
        }
        for k in 0..n {
            b[perm[k]] = x[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upper_of(dense: &[Vec<f64>]) -> CscMatrix<f64> {
        let n = dense.len();
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..=j {
                if dense[i][j] != 0.0 || i == j {
                    t.push((i, j, dense[i][j]));
                }
            }
        }
        CscMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn solves_quasi_definite_system() {
        // [P A'; A -I] with P = [[4,1],[1,3]], A = [1 2]
        let k = vec![vec![4.0, 1.0, 1.0], vec![1.0, 3.0, 2.0], vec![1.0, 2.0, -1.0]];
        let up = upper_of(&k);
        let sym = Arc::new(LdlSymbolic::analyze(&up).unwrap());
        let mut f = LdlFactor::factor(sym, &up).unwrap();
        assert_eq!(f.positive_pivots(), 2);
        let x_true = [1.0, -2.0, 0.5];
        let mut b: Vec<f64> = k.iter().map(|r| r.iter().zip(&x_true).map(|(a, b)| a * b).sum()).collect();
        f.solve(&mut b);
        for (a, e) in b.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_missing_diagonal() {
        let up = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        assert!(LdlSymbolic::analyze(&up).is_err());
    }

    #[test]
    fn refactor_reuses_symbolic() {
        let k1 = vec![vec![2.0, 1.0], vec![1.0, -1.0]];
        let mut up = upper_of(&k1);
        let sym = Arc::new(LdlSymbolic::analyze(&up).unwrap());
        up.nzval[2] = -5.0;
        let mut f = LdlFactor::factor(sym.clone(), &up).unwrap();
        let mut b = vec![3.0, -4.0];
        f.solve(&mut b);
        assert!((2.0 * b[0] + b[1] - 3.0).abs() < 1e-12);
        assert!((b[0] - 5.0 * b[1] + 4.0).abs() < 1e-12);
    }
}
