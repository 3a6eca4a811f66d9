//! Problem data `(A, B, C)` and its JSON form.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::BmiError;

/// Dense matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        (0..n).for_each(|i| m.data[i * n + i] = 1.0);
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix { rows: rows.len(), cols, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// `max t` s.t. `(A + BFC)ᵀP + P(A + BFC) + 2tP ⪯ 0`, `P ⪰ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmiInstance {
    #[serde(default)]
    pub name: String,
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl BmiInstance {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self, BmiError> {
        let inst = BmiInstance { name: String::new(), a, b, c };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.a.rows
    }

    pub fn nu(&self) -> usize {
        self.b.cols
    }

    pub fn ny(&self) -> usize {
        self.c.rows
    }

    pub fn validate(&self) -> Result<(), BmiError> {
        for (name, m) in [("A", &self.a), ("B", &self.b), ("C", &self.c)] {
            if m.data.len() != m.rows * m.cols {
                return Err(BmiError::Dimension(format!(
                    "{name} is {}x{} but holds {} entries",
                    m.rows,
                    m.cols,
                    m.data.len()
                )));
            }
            if m.data.iter().any(|v| !v.is_finite()) {
                return Err(BmiError::Parse(format!("{name} has a non-finite entry")));
            }
        }
        let n = self.a.rows;
        if n == 0 || self.a.cols != n {
            return Err(BmiError::Dimension(format!("A must be square and nonempty, got {}x{}", n, self.a.cols)));
        }
        if self.b.rows != n {
            return Err(BmiError::Dimension(format!("B has {} rows, A has {n}", self.b.rows)));
        }
        if self.c.cols != n {
            return Err(BmiError::Dimension(format!("C has {} columns, A has {n}", self.c.cols)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, BmiError> {
        let inst: BmiInstance = serde_json::from_str(text).map_err(|e| BmiError::Parse(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    /// `A + BFC` for `F` given row-major (`n_u × n_y`).
    pub fn closed_loop(&self, f: &[f64]) -> DMatrix<f64> {
        let fm = DMatrix::from_row_slice(self.nu(), self.ny(), f);
        self.a.to_na() + self.b.to_na() * fm * self.c.to_na()
    }
}

/// The 5-state instance bundled with the crate.
pub fn bundled_instance() -> BmiInstance {
    BmiInstance::from_json(include_str!("../data/spectral5.json")).expect("bundled instance is valid")
}
