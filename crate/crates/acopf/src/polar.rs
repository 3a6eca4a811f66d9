//! Back to bus voltages, and a check of the original polar constraints.

use serde::{Deserialize, Serialize};

use crate::case::NetworkModel;
use crate::error::OpfError;
use crate::formulation::{angle_limits, branch_ends, generation_cost, CsThetaPoint};

/// Largest violation of each polar constraint group, in per unit (angles in
/// radians).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarReport {
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub p_balance: f64,
    pub q_balance: f64,
    pub line_flow: f64,
    pub voltage: f64,
    pub generation: f64,
    pub angle: f64,
}

impl PolarReport {
    pub fn max_violation(&self) -> f64 {
        [self.p_balance, self.q_balance, self.line_flow, self.voltage, self.generation, self.angle]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `v = √c_ii`, θ as given; evaluates balances and limits in polar form.
pub fn recover_polar(pt: &CsThetaPoint, model: &NetworkModel) -> Result<PolarReport, OpfError> {
    let y = model.admittance.as_ref().ok_or_else(|| OpfError::Model("admittance not built".into()))?;
    if let Some(i) = pt.cii.iter().position(|&c| !(c > 0.0)) {
        return Err(OpfError::Model(format!("bus {}: c_ii = {} is not positive", model.buses[i].id, pt.cii[i])));
    }
    let v: Vec<f64> = pt.cii.iter().map(|c| c.sqrt()).collect();
    let th = &pt.theta;
    let nb = v.len();
    let idx = model.bus_index();

    let mut p_inj = vec![0.0; nb];
    let mut q_inj = vec![0.0; nb];
    for (g, gen) in model.gens.iter().enumerate() {
        p_inj[idx[&gen.bus]] += pt.p[g];
        q_inj[idx[&gen.bus]] += pt.q[g];
    }
    let mut p_out = vec![0.0; nb];
    let mut q_out = vec![0.0; nb];
    for (i, b) in model.buses.iter().enumerate() {
        p_out[i] = b.pd + b.gs * v[i] * v[i];
        q_out[i] = b.qd - b.bs * v[i] * v[i];
    }
    let mut line_flow: f64 = 0.0;
    for (l, &(f, t)) in branch_ends(model).iter().enumerate() {
        let a = &y.branches[l];
        let vv = v[f] * v[t];
        let (sn, cs) = (th[f] - th[t]).sin_cos();
        let pf = a.g_ff * v[f] * v[f] + vv * (a.g_ft * cs + a.b_ft * sn);
        let qf = -a.b_ff * v[f] * v[f] + vv * (a.g_ft * sn - a.b_ft * cs);
        let pt_ = a.g_tt * v[t] * v[t] + vv * (a.g_tf * cs - a.b_tf * sn);
        let qt = -a.b_tt * v[t] * v[t] + vv * (-a.g_tf * sn - a.b_tf * cs);
        p_out[f] += pf;
        q_out[f] += qf;
        p_out[t] += pt_;
        q_out[t] += qt;
        let rate = model.branches[l].rate_a;
        if rate > 0.0 {
            line_flow = line_flow.max(pf.hypot(qf) - rate).max(pt_.hypot(qt) - rate);
        }
    }
    let worst = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let outside = |x: f64, lo: f64, hi: f64| (lo - x).max(x - hi).max(0.0);
    let voltage = model.buses.iter().zip(&v).fold(0.0f64, |m, (b, &vi)| m.max(outside(vi, b.vmin, b.vmax)));
    let generation = model.gens.iter().enumerate().fold(0.0f64, |m, (g, gen)| {
        m.max(outside(pt.p[g], gen.pmin, gen.pmax)).max(outside(pt.q[g], gen.qmin, gen.qmax))
    });
    // Original limits, before the ±π/2 normalization.
    let raw = angle_limits(model, f64::NEG_INFINITY);
    let angle = branch_ends(model)
        .iter()
        .zip(&raw)
        .fold(0.0f64, |m, (&(f, t), &(lo, hi))| m.max(outside(th[f] - th[t], lo, hi)));
    Ok(PolarReport {
        p_balance: worst(&p_inj, &p_out),
        q_balance: worst(&q_inj, &q_out),
        line_flow: line_flow.max(0.0),
        voltage,
        generation,
        angle,
        v,
        theta: th.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusSolution {
    pub id: usize,
    pub vm: f64,
    pub va_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSolution {
    pub bus: usize,
    pub pg_mw: f64,
    pub qg_mvar: f64,
}

/// Solution in engineering units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpfSolution {
    pub case: String,
    /// $/h, constant cost terms included.
    pub objective: f64,
    pub buses: Vec<BusSolution>,
    pub gens: Vec<GenSolution>,
}

pub fn solution(model: &NetworkModel, pt: &CsThetaPoint, report: &PolarReport) -> OpfSolution {
    OpfSolution {
        case: model.name.clone(),
        objective: generation_cost(model, &pt.p),
        buses: model
            .buses
            .iter()
            .zip(report.v.iter().zip(&report.theta))
            .map(|(b, (&vm, &va))| BusSolution { id: b.id, vm, va_deg: va.to_degrees() })
            .collect(),
        gens: model
            .gens
            .iter()
            .enumerate()
            .map(|(g, gen)| GenSolution {
                bus: gen.bus,
                pg_mw: pt.p[g] * model.base_mva,
                qg_mvar: pt.q[g] * model.base_mva,
            })
            .collect(),
    }
}
