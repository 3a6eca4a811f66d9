#![allow(dead_code)]

use l1gn::gn::{ConstraintClass, NonconvexProblem, Omega, OmegaBlock, QuadObjective, VariableLayout};
use l1gn::linalg::CscMatrix;

/// `min x₁ s.t. x₁² + x₂² − 1 = 0, x ∈ [−2, 2]²`.
pub struct Circle {
    obj: QuadObjective<f64>,
    classes: Vec<ConstraintClass>,
    layout: VariableLayout,
}

impl Circle {
    pub fn new() -> Self {
        Circle {
            obj: QuadObjective { hess_diag: vec![0.0, 0.0], linear: vec![1.0, 0.0], constant: 0.0 },
            classes: vec![ConstraintClass { name: "circle".into(), rows: 0..1 }],
            layout: VariableLayout::single(2),
        }
    }
}

impl NonconvexProblem<f64> for Circle {
    fn dim(&self) -> usize {
        2
    }
    fn objective(&self) -> &QuadObjective<f64> {
        &self.obj
    }
    fn classes(&self) -> &[ConstraintClass] {
        &self.classes
    }
    fn residual_len(&self) -> usize {
        1
    }
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] * x[0] + x[1] * x[1] - 1.0]
    }
    fn jacobian(&self, x: &[f64]) -> CscMatrix<f64> {
        CscMatrix::from_triplets(1, 2, &[(0, 0, 2.0 * x[0]), (0, 1, 2.0 * x[1])])
    }
    fn omega(&self) -> Omega<f64> {
        let mut o = Omega::new(2);
        o.push(OmegaBlock::var_box(&[0, 1], vec![-2.0; 2], vec![2.0; 2]));
        o
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(2.0)
    }
    fn layout(&self) -> &VariableLayout {
        &self.layout
    }
}

/// Affine residual `Ψ(x) = A x − b` split into classes, with a configurable
/// quadratic objective and no `Ω` blocks.
pub struct Affine {
    pub obj: QuadObjective<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub classes: Vec<ConstraintClass>,
    pub layout: VariableLayout,
}

impl NonconvexProblem<f64> for Affine {
    fn dim(&self) -> usize {
        self.layout.dim()
    }
    fn objective(&self) -> &QuadObjective<f64> {
        &self.obj
    }
    fn classes(&self) -> &[ConstraintClass] {
        &self.classes
    }
    fn residual_len(&self) -> usize {
        self.b.len()
    }
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(r, b)| r.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b).collect()
    }
    fn jacobian(&self, _x: &[f64]) -> CscMatrix<f64> {
        CscMatrix::from_dense(&self.a)
    }
    fn omega(&self) -> Omega<f64> {
        Omega::new(self.dim())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
    fn layout(&self) -> &VariableLayout {
        &self.layout
    }
}
