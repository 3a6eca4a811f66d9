use crate::gn::params::PenaltyWeights;
use crate::gn::problem::{ConstraintClass, NonconvexProblem};
use crate::linalg::{vecops, CscMatrix};
use crate::{Error, Scalar};

fn check_dim<T: Scalar, P: NonconvexProblem<T> + ?Sized>(p: &P, x: &[T], w: &PenaltyWeights<T>) -> Result<(), Error> {
    if x.len() != p.dim() {
        return Err(Error::Dimension(format!("point has {} entries, problem has {}", x.len(), p.dim())));
    }
    if w.beta.len() != p.classes().len() {
        return Err(Error::Dimension(format!(
            "{} penalty weights for {} constraint classes",
            w.beta.len(),
            p.classes().len()
        )));
    }
    Ok(())
}

/// `Σ_c β_c ‖r_c‖₁` for a residual (or linearized residual) vector.
pub fn weighted_l1<T: Scalar>(classes: &[ConstraintClass], w: &PenaltyWeights<T>, r: &[T]) -> T {
    classes.iter().zip(&w.beta).fold(T::zero(), |s, (c, &b)| s + b * vecops::norm1(&r[c.rows.clone()]))
}

/// `(‖r_c‖₁, ‖r_c‖∞)` per class.
pub fn class_norms<T: Scalar>(classes: &[ConstraintClass], r: &[T]) -> (Vec<T>, Vec<T>) {
    classes.iter().map(|c| (vecops::norm1(&r[c.rows.clone()]), vecops::norm_inf(&r[c.rows.clone()]))).unzip()
}

/// `F(x) = f(x) + Σ_c β_c ‖Ψ_c(x)‖₁`.
pub fn penalty_value<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    x: &[T],
    w: &PenaltyWeights<T>,
) -> Result<T, Error> {
    check_dim(p, x, w)?;
    let psi = p.residual(x);
    Ok(p.objective().value(x) + weighted_l1(p.classes(), w, &psi))
}

/// `Ψ(x_k) + Ψ'(x_k)(y − x_k)`.
pub fn linearized_residual<T: Scalar>(psi_k: &[T], jac: &CscMatrix<T>, x_k: &[T], y: &[T]) -> Vec<T> {
    let d = vecops::sub(y, x_k);
    let mut out = psi_k.to_vec();
    jac.mul_vec_into(&d, &mut out, true);
    out
}

/// `Q_L(y; x_k) = f(y) + Σ_c β_c‖Ψ_c(x_k) + Ψ'_c(x_k)(y − x_k)‖₁ + Σ_s L_s/2 ‖(y − x_k)_s‖²`,
/// with `l` given per slice of the problem's layout.
pub fn model_value<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    x_k: &[T],
    y: &[T],
    w: &PenaltyWeights<T>,
    l: &[T],
) -> Result<T, Error> {
    check_dim(p, x_k, w)?;
    check_dim(p, y, w)?;
    if l.len() != p.layout().slices().len() {
        return Err(Error::Dimension("one L value per variable slice expected".into()));
    }
    let psi = p.residual(x_k);
    let jac = p.jacobian(x_k);
    Ok(model_value_with(p, &psi, &jac, x_k, y, w, l))
}

/// [`model_value`] with the residual and Jacobian at `x_k` supplied.
pub fn model_value_with<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    psi_k: &[T],
    jac: &CscMatrix<T>,
    x_k: &[T],
    y: &[T],
    w: &PenaltyWeights<T>,
    l: &[T],
) -> T {
    let lin = linearized_residual(psi_k, jac, x_k, y);
    let half = T::of(0.5);
    let prox = p.layout().slices().iter().zip(l).fold(T::zero(), |s, (sl, &lv)| {
        let d = vecops::sub(&y[sl.range.clone()], &x_k[sl.range.clone()]);
        s + half * lv * vecops::dot(&d, &d)
    });
    p.objective().value(y) + weighted_l1(p.classes(), w, &lin) + prox
}

/// Gradient mapping at `x_k`: `(G_L, d_L, r_L)` with `G_L = L ⊙ (x_k − V_L)`,
/// `d_L = V_L − x_k` and `r_L = ‖d_L‖₂`. `l` holds one value per variable.
pub fn gradient_mapping<T: Scalar>(x_k: &[T], v: &[T], l: &[T]) -> (Vec<T>, Vec<T>, T) {
    let d = vecops::sub(v, x_k);
    let g = d.iter().zip(l).map(|(&di, &li)| -li * di).collect();
    let r = vecops::norm2(&d);
    (g, d, r)
}

/// `∇f(x)ᵀd + Σ_c β_c ξ_cᵀ Ψ'_c(x) d`.
///
/// Without `xi` the subgradient selection is `sign(Ψ(x))` with `sign(0) = 0`,
/// which makes this the one-sided derivative of `F` at `x` along `d` whenever
/// no residual component vanishes. A caller may pass its own selection, for
/// instance the subsolver multipliers divided by `β`.
pub fn directional_derivative<T: Scalar, P: NonconvexProblem<T> + ?Sized>(
    p: &P,
    x: &[T],
    d: &[T],
    w: &PenaltyWeights<T>,
    xi: Option<&[T]>,
) -> Result<T, Error> {
    check_dim(p, x, w)?;
    if d.len() != x.len() {
        return Err(Error::Dimension("direction length differs from point".into()));
    }
    let grad = p.objective().gradient(x);
    let jd = p.jacobian(x).mul_vec(d);
    let sel: Vec<T> = match xi {
        Some(s) => s.to_vec(),
        None => p
            .residual(x)
            .iter()
            .map(|&r| {
                if r > T::zero() {
                    T::one()
                } else if r < T::zero() {
                    -T::one()
                } else {
                    T::zero()
                }
            })
            .collect(),
    };
    let mut total = vecops::dot(&grad, d);
    for (c, &b) in p.classes().iter().zip(&w.beta) {
        total = total + b * vecops::dot(&sel[c.rows.clone()], &jd[c.rows.clone()]);
    }
    Ok(total)
}
