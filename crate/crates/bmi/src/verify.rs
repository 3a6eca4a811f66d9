//! Independent check of a returned point.

use l1gn::gn::NonconvexProblem;
use serde::{Deserialize, Serialize};

use crate::problem::BmiProblem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmiVerification {
    pub t: f64,
    /// Largest entry of `|Ψ|`.
    pub psi_inf: f64,
    pub lambda_min_p: f64,
    pub lambda_min_s: f64,
    /// `max Re λ(A + BFC)`.
    pub abscissa: f64,
}

impl BmiVerification {
    /// `Ψ ≈ 0`, `P ≻ 0`, `S ⪰ 0` up to `psd_tol`, and the decay-rate bound
    /// `max Re λ ≤ −t + tol`.
    pub fn certified(&self, tol: f64, psd_tol: f64) -> bool {
        self.psi_inf <= tol
            && self.lambda_min_p > 0.0
            && self.lambda_min_s >= -psd_tol
            && self.abscissa <= -self.t + tol
    }
}

pub fn verify_bmi_solution(problem: &BmiProblem, x: &[f64]) -> BmiVerification {
    let pt = problem.point(x);
    let psi = problem.residual(x);
    let lam = |m: &nalgebra::DMatrix<f64>| m.clone().symmetric_eigenvalues().min();
    let abscissa = problem.inst.closed_loop(&pt.f).complex_eigenvalues().iter().map(|z| z.re).fold(f64::MIN, f64::max);
    BmiVerification {
        t: pt.t,
        psi_inf: psi.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        lambda_min_p: lam(&pt.p),
        lambda_min_s: lam(&pt.s),
        abscissa,
    }
}
