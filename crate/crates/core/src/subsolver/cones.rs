//! Proximal operators and Euclidean projections used by the splitting.

use nalgebra::DMatrix;

use crate::{Error, Scalar};

/// Soft threshold `sign(v)·max(|v|−t, 0)`, the prox of `Σ tᵢ|yᵢ|`.
pub fn prox_l1<T: Scalar>(v: &[T], thresh: &[T]) -> Vec<T> {
    v.iter().zip(thresh).map(|(&x, &t)| soft_threshold(x, t)).collect()
}

#[inline]
pub fn soft_threshold<T: Scalar>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

pub fn project_box<T: Scalar>(v: &[T], lo: &[T], hi: &[T]) -> Vec<T> {
    v.iter().zip(lo.iter().zip(hi)).map(|(&x, (&l, &h))| x.max(l).min(h)).collect()
}

/// Projection onto `{(t, u) : ‖u‖₂ ≤ t}` in place; `v[0]` is `t`.
pub fn project_soc_in_place<T: Scalar>(v: &mut [T]) {
    if v.is_empty() {
        return;
    }
    let t = v[0];
    let nu = v[1..].iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    if nu <= t {
        return;
    }
    if nu <= -t {
        v.iter_mut().for_each(|x| *x = T::zero());
        return;
    }
    let half = T::of(0.5);
    let a = half * (t + nu);
    v[0] = a;
    let s = a / nu;
    for x in &mut v[1..] {
        *x = *x * s;
    }
}

pub fn project_soc<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    project_soc_in_place(&mut out);
    out
}

/// Length of the packed vector of an `m × m` symmetric matrix.
pub fn svec_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Side `m` with `m(m+1)/2 = len`, if one exists.
pub fn svec_side(len: usize) -> Option<usize> {
    let m = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (svec_len(m) == len).then_some(m)
}

/// Position of entry `(i, j)` (either order) in the packed vector. Packing
/// runs down the upper triangle column by column.
#[inline]
pub fn svec_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

/// Packs a symmetric matrix (row-major, `m × m`), scaling off-diagonals by √2
/// so that the vector 2-norm equals the Frobenius norm.
pub fn svec<T: Scalar>(mat: &[T], m: usize) -> Vec<T> {
    assert_eq!(mat.len(), m * m);
    let r2 = T::of(std::f64::consts::SQRT_2);
    let half = T::of(0.5);
    let mut out = vec![T::zero(); svec_len(m)];
    for j in 0..m {
        for i in 0..=j {
            out[svec_index(i, j)] = if i == j { mat[i * m + i] } else { r2 * half * (mat[i * m + j] + mat[j * m + i]) };
        }
    }
    out
}

/// Inverse of [`svec`], returning a row-major symmetric matrix.
pub fn smat<T: Scalar>(v: &[T], m: usize) -> Vec<T> {
    assert_eq!(v.len(), svec_len(m));
    let ir2 = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let mut out = vec![T::zero(); m * m];
    for j in 0..m {
        for i in 0..=j {
            let x = v[svec_index(i, j)];
            if i == j {
                out[i * m + i] = x;
            } else {
                out[i * m + j] = x * ir2;
                out[j * m + i] = x * ir2;
            }
        }
    }
    out
}

/// Eigenvalues (ascending) and row-major eigenvector matrix (columns are
/// vectors) of a symmetric matrix. The input is symmetrized first.
pub fn sym_eigen<T: Scalar>(mat: &[T], m: usize) -> Result<(Vec<f64>, DMatrix<f64>), Error> {
    let a = DMatrix::from_fn(m, m, |i, j| 0.5 * (mat[i * m + j].f64() + mat[j * m + i].f64()));
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite matrix entry".into()));
    }
    let eig = nalgebra::SymmetricEigen::try_new(a, 1e-15, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(m, m, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok((vals, vecs))
}

pub fn lambda_min<T: Scalar>(mat: &[T], m: usize) -> Result<f64, Error> {
    if m == 0 {
        return Ok(0.0);
    }
    Ok(sym_eigen(mat, m)?.0[0])
}

/// Frobenius-nearest PSD matrix (row-major in, row-major out).
pub fn project_psd<T: Scalar>(mat: &[T], m: usize) -> Result<Vec<T>, Error> {
    assert_eq!(mat.len(), m * m);
    let (vals, vecs) = sym_eigen(mat, m)?;
    let mut out = vec![T::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            let s: f64 = (0..m).map(|k| vals[k].max(0.0) * vecs[(i, k)] * vecs[(j, k)]).sum();
            out[i * m + j] = T::of(s);
        }
    }
    Ok(out)
}

/// PSD projection acting on packed vectors.
pub fn project_psd_svec_in_place<T: Scalar>(v: &mut [T], m: usize) -> Result<(), Error> {
    let mat = smat(v, m);
    let p = project_psd(&mat, m)?;
    v.copy_from_slice(&svec(&p, m));
    Ok(())
}
