//! Branch π-model admittances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::NetworkModel;
use crate::error::OpfError;

/// Entries of the 2×2 branch admittance matrix
/// `[Y_ff Y_ft; Y_tf Y_tt]` split into conductance and susceptance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchAdmittance {
    pub g_ff: f64,
    pub b_ff: f64,
    pub g_ft: f64,
    pub b_ft: f64,
    pub g_tf: f64,
    pub b_tf: f64,
    pub g_tt: f64,
    pub b_tt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admittance {
    pub branches: Vec<BranchAdmittance>,
    /// Diagonal of the bus admittance matrix: shunt plus every incident
    /// branch's self term.
    pub g_diag: Vec<f64>,
    pub b_diag: Vec<f64>,
}

impl BranchAdmittance {
    /// MATPOWER branch model: series `1/(r + jx)`, total charging `b` split
    /// between the ends, ideal transformer `ratio·e^{j·shift}` on the from
    /// side.
    pub fn new(r: f64, x: f64, b: f64, ratio: f64, shift: f64) -> Result<Self, OpfError> {
        if r == 0.0 && x == 0.0 {
            return Err(OpfError::Model("zero-impedance branch (r = x = 0)".into()));
        }
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(r, x);
        let ratio = if ratio == 0.0 { 1.0 } else { ratio };
        let tap = Complex64::from_polar(ratio, shift);
        let ytt = ys + Complex64::new(0.0, b / 2.0);
        let yff = ytt / (tap * tap.conj());
        let yft = -ys / tap.conj();
        let ytf = -ys / tap;
        Ok(BranchAdmittance {
            g_ff: yff.re,
            b_ff: yff.im,
            g_ft: yft.re,
            b_ft: yft.im,
            g_tf: ytf.re,
            b_tf: ytf.im,
            g_tt: ytt.re,
            b_tt: ytt.im,
        })
    }
}

pub fn build_admittance(mut model: NetworkModel) -> Result<NetworkModel, OpfError> {
    let idx = model.bus_index();
    let mut g_diag: Vec<f64> = model.buses.iter().map(|b| b.gs).collect();
    let mut b_diag: Vec<f64> = model.buses.iter().map(|b| b.bs).collect();
    let mut branches = Vec::with_capacity(model.branches.len());
    for br in &model.branches {
        let y = BranchAdmittance::new(br.r, br.x, br.b, br.ratio, br.shift).map_err(|e| match e {
            OpfError::Model(m) => OpfError::Model(format!("branch {}-{}: {m}", br.from, br.to)),
            other => other,
        })?;
        let (f, t) = (idx[&br.from], idx[&br.to]);
        g_diag[f] += y.g_ff;
        b_diag[f] += y.b_ff;
        g_diag[t] += y.g_tt;
        b_diag[t] += y.b_tt;
        branches.push(y);
    }
    model.admittance = Some(Admittance { branches, g_diag, b_diag });
    Ok(model)
}
