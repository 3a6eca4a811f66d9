use std::io::Write;

use crate::gn::linesearch::AcceptedBy;
use crate::Scalar;

/// One accepted outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow<T> {
    pub k: usize,
    /// Restarts performed before this iteration.
    pub restarts: usize,
    pub penalty_prev: T,
    pub penalty: T,
    pub objective: T,
    pub psi_inf: Vec<T>,
    pub psi_l1: Vec<T>,
    pub l: Vec<T>,
    pub l_min: T,
    pub r_l: T,
    pub g_norm: T,
    pub step_inf: T,
    pub inner_iters: usize,
    pub l_updates: usize,
    pub lazy_added: usize,
    pub accepted_by: AcceptedBy,
    pub wall_ms: Option<f64>,
}

impl<T: Scalar> TraceRow<T> {
    /// `F(x^k) − F(x^{k+1}) − (L_min/2)·r²`; nonnegative up to solver accuracy
    /// on every step accepted by a test.
    pub fn descent_margin(&self) -> f64 {
        let r = self.r_l.f64();
        self.penalty_prev.f64() - self.penalty.f64() - 0.5 * self.l_min.f64() * r * r
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Writes the trace as CSV. The wall-clock column is only present when the
/// rows carry timings, so untimed traces are reproducible byte for byte.
pub fn write_trace_csv<T: Scalar, W: Write>(
    out: W,
    rows: &[TraceRow<T>],
    class_names: &[String],
    slice_names: &[String],
) -> Result<(), csv::Error> {
    let timed = rows.iter().any(|r| r.wall_ms.is_some());
    let mut wtr = csv::Writer::from_writer(out);
    let mut header: Vec<String> = vec!["k".into(), "restarts".into(), "F".into(), "f".into()];
    header.extend(class_names.iter().map(|c| format!("psi_inf_{c}")));
    header.extend(slice_names.iter().map(|s| format!("L_{s}")));
    header.extend(
        ["r_L", "G_norm", "step_inf", "inner_iters", "l_updates", "lazy_added", "accepted_by"]
            .iter()
            .map(|s| s.to_string()),
    );
    if timed {
        header.push("wall_ms".into());
    }
    wtr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.k.to_string(), r.restarts.to_string(), num(r.penalty.f64()), num(r.objective.f64())];
        rec.extend(r.psi_inf.iter().map(|v| num(v.f64())));
        rec.extend(r.l.iter().map(|v| num(v.f64())));
        rec.push(num(r.r_l.f64()));
        rec.push(num(r.g_norm.f64()));
        rec.push(num(r.step_inf.f64()));
        rec.push(r.inner_iters.to_string());
        rec.push(r.l_updates.to_string());
        rec.push(r.lazy_added.to_string());
        rec.push(r.accepted_by.name().to_string());
        if timed {
            rec.push(format!("{:.3}", r.wall_ms.unwrap_or(0.0)));
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
