use crate::Scalar;

/// Compressed sparse column matrix.
///
/// Explicit zeros are kept: Jacobians evaluated at special points (flat
/// start, zero angles) must have the same pattern as everywhere else so the
/// symbolic factorization can be reused.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowval: Vec<usize>,
    pub nzval: Vec<T>,
}

impl<T: Scalar> CscMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CscMatrix { nrows, ncols, colptr: vec![0; ncols + 1], rowval: Vec::new(), nzval: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(d: &[T]) -> Self {
        let n = d.len();
        CscMatrix { nrows: n, ncols: n, colptr: (0..=n).collect(), rowval: (0..n).collect(), nzval: d.to_vec() }
    }

    /// Builds from (row, col, value) triplets. Duplicates are summed, rows are
    /// sorted within each column and zeros are retained.
    pub fn from_triplets(nrows: usize, ncols: usize, trip: &[(usize, usize, T)]) -> Self {
        let mut count = vec![0usize; ncols + 1];
        for &(r, c, _) in trip {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            count[c + 1] += 1;
        }
        for j in 0..ncols {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let mut rows = vec![0usize; trip.len()];
        let mut vals = vec![T::zero(); trip.len()];
        for &(r, c, v) in trip {
            let p = next[c];
            rows[p] = r;
            vals[p] = v;
            next[c] += 1;
        }
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowval = Vec::with_capacity(trip.len());
        let mut nzval = Vec::with_capacity(trip.len());
        colptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for j in 0..ncols {
            order.clear();
            order.extend(count[j]..count[j + 1]);
            order.sort_by_key(|&p| rows[p]);
            let mut last = usize::MAX;
            for &p in &order {
                if rows[p] == last {
                    let k = nzval.len() - 1;
                    nzval[k] = nzval[k] + vals[p];
                } else {
                    rowval.push(rows[p]);
                    nzval.push(vals[p]);
                    last = rows[p];
                }
            }
            colptr.push(rowval.len());
        }
        CscMatrix { nrows, ncols, colptr, rowval, nzval }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                out[self.rowval[p]][j] = out[self.rowval[p]][j] + self.nzval[p];
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.rowval.len()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (a, b) = (self.colptr[c], self.colptr[c + 1]);
        match self.rowval[a..b].binary_search(&r) {
            Ok(k) => self.nzval[a + k],
            Err(_) => T::zero(),
        }
    }

    /// `y = A x` (or `y += A x` when `accumulate`).
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T], accumulate: bool) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        if !accumulate {
            y.iter_mut().for_each(|v| *v = T::zero());
        }
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == T::zero() {
                continue;
            }
            for p in self.colptr[j]..self.colptr[j + 1] {
                y[self.rowval[p]] = y[self.rowval[p]] + self.nzval[p] * xj;
            }
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.mul_vec_into(x, &mut y, false);
        y
    }

    /// `y = Aᵀ x` (or `y += Aᵀ x` when `accumulate`).
    pub fn tmul_vec_into(&self, x: &[T], y: &mut [T], accumulate: bool) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for j in 0..self.ncols {
            let mut s = T::zero();
            for p in self.colptr[j]..self.colptr[j + 1] {
                s = s + self.nzval[p] * x[self.rowval[p]];
            }
            y[j] = if accumulate { y[j] + s } else { s };
        }
    }

    pub fn tmul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.ncols];
        self.tmul_vec_into(x, &mut y, false);
        y
    }

    /// `y = P x` where only the upper triangle of the symmetric `P` is stored.
    pub fn sym_upper_mul_vec_into(&self, x: &[T], y: &mut [T], accumulate: bool) {
        assert_eq!(self.nrows, self.ncols);
        if !accumulate {
            y.iter_mut().for_each(|v| *v = T::zero());
        }
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowval[p];
                let v = self.nzval[p];
                y[i] = y[i] + v * x[j];
                if i != j {
                    y[j] = y[j] + v * x[i];
                }
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.nrows + 1];
        for &r in &self.rowval {
            count[r + 1] += 1;
        }
        for i in 0..self.nrows {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut rowval = vec![0usize; self.nnz()];
        let mut nzval = vec![T::zero(); self.nnz()];
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let r = self.rowval[p];
                let q = next[r];
                rowval[q] = j;
                nzval[q] = self.nzval[p];
                next[r] += 1;
            }
        }
        CscMatrix { nrows: self.ncols, ncols: self.nrows, colptr: count, rowval, nzval }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[&CscMatrix<T>]) -> Self {
        let ncols = blocks.first().map_or(0, |b| b.ncols);
        let nrows = blocks.iter().map(|b| b.nrows).sum();
        let nnz = blocks.iter().map(|b| b.nnz()).sum();
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowval = Vec::with_capacity(nnz);
        let mut nzval = Vec::with_capacity(nnz);
        colptr.push(0);
        for j in 0..ncols {
            let mut off = 0;
            for b in blocks {
                assert_eq!(b.ncols, ncols, "vstack column mismatch");
                for p in b.colptr[j]..b.colptr[j + 1] {
                    rowval.push(b.rowval[p] + off);
                    nzval.push(b.nzval[p]);
                }
                off += b.nrows;
            }
            colptr.push(rowval.len());
        }
        CscMatrix { nrows, ncols, colptr, rowval, nzval }
    }

    /// Infinity norm of every column.
    pub fn col_norms_inf(&self) -> Vec<T> {
        (0..self.ncols)
            .map(|j| self.nzval[self.colptr[j]..self.colptr[j + 1]].iter().fold(T::zero(), |m, v| m.max(v.abs())))
            .collect()
    }

    /// Infinity norm of every row.
    pub fn row_norms_inf(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.nrows];
        for (p, &r) in self.rowval.iter().enumerate() {
            out[r] = out[r].max(self.nzval[p].abs());
        }
        out
    }

    /// `A ← diag(l) A diag(r)`.
    pub fn scale(&mut self, l: &[T], r: &[T]) {
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                self.nzval[p] = l[self.rowval[p]] * self.nzval[p] * r[j];
            }
        }
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.colptr == other.colptr
            && self.rowval == other.rowval
    }

    pub fn cast<U: Scalar>(&self) -> CscMatrix<U> {
        CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            colptr: self.colptr.clone(),
            rowval: self.rowval.clone(),
            nzval: self.nzval.iter().map(|v| U::of(v.f64())).collect(),
        }
    }
}
