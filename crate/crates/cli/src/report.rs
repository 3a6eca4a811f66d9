//! Report JSON and error objects.

use l1gn::gn::{SolveReport, Status};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Exit status and message of a failed command.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, kind: "usage", message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, kind: "input", message: message.into() }
    }

    pub fn solve(message: impl Into<String>) -> Self {
        CliError { code: 1, kind: "solve", message: message.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": self.kind, "message": self.message, "exit_code": self.code },
        })
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Converged => 0,
        Status::MaxIterations | Status::Stalled => 1,
    }
}

/// `null` for NaN and infinities, so every number in a report is finite.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Counters and violations common to every solve.
pub fn solve_summary(r: &SolveReport<f64>) -> Value {
    let mut viol = Map::new();
    for (name, v) in &r.max_violation {
        viol.insert(name.clone(), num(*v));
    }
    let last_l = r.trace.last().map(|row| row.l.iter().map(|&v| num(v)).collect::<Vec<_>>()).unwrap_or_default();
    json!({
        "status": r.status.name(),
        "objective": num(r.objective),
        "penalty": num(r.penalty),
        "initial_penalty": num(r.initial_penalty),
        "max_violation": viol,
        "outer_iterations": r.outer_iterations,
        "l_updates": r.l_updates,
        "inner_iterations_total": r.inner_iterations_total,
        "subproblem_solves": r.subproblem_solves,
        "restarts": r.restarts,
        "lazy_added": r.lazy_added,
        "forced_acceptances": r.forced_acceptances,
        "inexact_subsolves": r.inexact_subsolves,
        "weights": r.weights.beta.iter().map(|&b| num(b)).collect::<Vec<_>>(),
        "final_l": last_l,
        "slices": r.slice_names,
        "wall_time": num(r.wall_time),
    })
}

/// Wraps a command-specific body with the schema header.
pub fn envelope(command: &str, exit: i32, body: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    out.insert("command".into(), json!(command));
    out.insert("exit_code".into(), json!(exit));
    if let Value::Object(m) = body {
        out.extend(m);
    }
    Value::Object(out)
}
