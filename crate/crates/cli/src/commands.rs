use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use acopf::{bench_warmstart, default_tuning, load_case, solution, solve_case, NetworkModel, OpfError, Tuning};
use bmi::{bundled_instance, solve_bmi_with, BmiError, BmiInstance, BmiTuning};
use l1gn::gn::write_trace_csv;
use log::info;
use serde_json::{json, Value};

use crate::args::{BmiArgs, BmiMode, OpfArgs};
use crate::report::{envelope, exit_code, num, solve_summary, CliError};

/// Report JSON plus the trace, if any, to be written on success.
pub struct Output {
    pub exit: i32,
    pub report: Value,
    pub trace: Option<Vec<u8>>,
}

fn opf_error(e: OpfError) -> CliError {
    match e {
        OpfError::Parse { .. } | OpfError::Model(_) | OpfError::Io(_) => CliError::input(e.to_string()),
        OpfError::Infeasible(_) | OpfError::Core(_) => CliError::solve(e.to_string()),
    }
}

fn bmi_error(e: BmiError) -> CliError {
    match e {
        BmiError::Parse(_) | BmiError::Dimension(_) => CliError::input(e.to_string()),
        BmiError::Core(_) => CliError::solve(e.to_string()),
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::input(format!("file not found: {}", path.display())),
        _ => CliError::input(format!("{}: {e}", path.display())),
    })
}

fn load_model(path: &Path) -> Result<NetworkModel, CliError> {
    read_input(path)?;
    load_case(path).map_err(opf_error)
}

fn opf_tuning(args: &OpfArgs, model: &NetworkModel) -> Tuning {
    let c = &args.common;
    let mut t = default_tuning(model);
    t = t.clone().with_beta(args.beta_t.unwrap_or(t.beta_t), args.beta_q_factor);
    t.strategy = c.strategy();
    t.tol_feas = c.tol_feas.unwrap_or(t.tol_feas);
    t.tol_step = c.tol_step.unwrap_or(t.tol_step);
    t.max_iter = c.max_iter.unwrap_or(t.max_iter);
    t.restart_cap = c.restart_cap.unwrap_or(t.restart_cap);
    t.lazy = args.lazy.on();
    t.warm_start = c.warmstart.on();
    t.seed = c.seed;
    t
}

fn trace_bytes(r: &l1gn::gn::SolveReport<f64>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &r.trace, &r.class_names, &r.slice_names)
        .map_err(|e| CliError::solve(format!("trace: {e}")))?;
    Ok(buf)
}

pub fn solve_opf(args: &OpfArgs) -> Result<Output, CliError> {
    args.validate().map_err(CliError::usage)?;
    let model = load_model(&args.case)?;
    let tuning = opf_tuning(args, &model);
    info!(
        "{}: {} buses, {} branches, {} generators",
        model.name,
        model.buses.len(),
        model.branches.len(),
        model.gens.len()
    );
    let run = solve_case(&model, &tuning).map_err(opf_error)?;
    info!("{}: {} after {} iterations", model.name, run.report.status.name(), run.report.outer_iterations);
    let exit = exit_code(run.report.status);
    let pt = run.problem.point(&run.report.x);
    let polar = &run.polar;
    let body = json!({
        "input": args.case.display().to_string(),
        "case": model.name,
        "solve": solve_summary(&run.report),
        "cost": num(run.cost),
        "relaxation": {
            "cost": num(run.init.relaxation_cost),
            "lower_bound": num(run.init.lower_bound),
            "iterations": run.init.socp_iters,
            "theta_fit": num(run.init.theta_fit),
        },
        "polar_violation": {
            "p_balance": num(polar.p_balance),
            "q_balance": num(polar.q_balance),
            "line_flow": num(polar.line_flow),
            "voltage": num(polar.voltage),
            "generation": num(polar.generation),
            "angle": num(polar.angle),
            "max": num(polar.max_violation()),
        },
        "tuning": tuning_json(&tuning),
        "solution": sanitize(serde_json::to_value(solution(&model, &pt, polar)).unwrap_or(Value::Null)),
    });
    Ok(Output { exit, report: envelope("solve-opf", exit, body), trace: Some(trace_bytes(&run.report)?) })
}

fn tuning_json(t: &Tuning) -> Value {
    json!({
        "beta_t": num(t.beta_t),
        "beta_q": num(t.beta_q),
        "strategy": t.strategy.name(),
        "mu": match t.strategy { l1gn::gn::Strategy::Geometric { mu } => num(mu), _ => Value::Null },
        "tol_feas": num(t.tol_feas),
        "tol_step": num(t.tol_step),
        "max_iter": t.max_iter,
        "restart_cap": t.restart_cap,
        "lazy": t.lazy,
        "warm_start": t.warm_start,
        "seed": t.seed,
    })
}

/// Replaces non-finite numbers that slipped through serialization.
fn sanitize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.as_f64().is_some_and(|f| !f.is_finite()) => Value::Null,
        Value::Array(a) => Value::Array(a.into_iter().map(sanitize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, sanitize(v))).collect()),
        other => other,
    }
}

pub fn solve_bmi(args: &BmiArgs) -> Result<Output, CliError> {
    args.validate().map_err(CliError::usage)?;
    let (inst, input) = match &args.instance {
        Some(path) => {
            let text = read_input(path)?;
            (BmiInstance::from_json(&text).map_err(bmi_error)?, path.display().to_string())
        }
        None => (bundled_instance(), "bundled".to_string()),
    };
    let c = &args.common;
    let mut tuning = match args.bmi_mode {
        BmiMode::Feasible => BmiTuning::default(),
        BmiMode::Optimal => BmiTuning::optimal(),
    };
    tuning.problem.beta = args.beta.unwrap_or(tuning.problem.beta);
    tuning.problem.seed = c.seed;
    tuning.mu = c.mu;
    tuning.tol_feas = c.tol_feas.unwrap_or(tuning.tol_feas);
    tuning.tol_step = c.tol_step.unwrap_or(tuning.tol_step);
    tuning.max_iter = c.max_iter.unwrap_or(tuning.max_iter);
    tuning.warm_start = c.warmstart.on();
    let strategy = c.strategy();
    let restart_cap = c.restart_cap;
    let run = solve_bmi_with(&inst, &tuning, |cfg| {
        cfg.reg.strategy = strategy;
        if let Some(cap) = restart_cap {
            cfg.restart_cap = cap;
        }
    })
    .map_err(bmi_error)?;
    info!("{}: {} after {} iterations", inst.name, run.report.status.name(), run.report.outer_iterations);
    let v = &run.verification;
    let exit = exit_code(run.report.status);
    let pt = run.problem.point(&run.report.x);
    let body = json!({
        "input": input,
        "instance": inst.name,
        "mode": match args.bmi_mode { BmiMode::Feasible => "feasible", BmiMode::Optimal => "optimal" },
        "solve": solve_summary(&run.report),
        "verification": {
            "t": num(v.t),
            "psi_inf": num(v.psi_inf),
            "lambda_min_p": num(v.lambda_min_p),
            "lambda_min_s": num(v.lambda_min_s),
            "abscissa": num(v.abscissa),
            "certified": v.certified(tuning.tol_feas, 1e-8),
        },
        "feedback": pt.f.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "beta": num(tuning.problem.beta),
        "strategy": strategy.name(),
    });
    Ok(Output { exit, report: envelope("solve-bmi", exit, body), trace: Some(trace_bytes(&run.report)?) })
}

pub fn bench(args: &OpfArgs) -> Result<Output, CliError> {
    args.validate().map_err(CliError::usage)?;
    let model = load_model(&args.case)?;
    let tuning = opf_tuning(args, &model);
    let (b, cold, warm) = bench_warmstart(&model, &tuning).map_err(opf_error)?;
    info!("{}: cold {} / warm {} inner iterations", b.case, b.cold_total, b.warm_total);
    let exit = exit_code(cold.report.status).max(exit_code(warm.report.status));
    let body = json!({
        "input": args.case.display().to_string(),
        "case": b.case,
        "cold_total": b.cold_total,
        "warm_total": b.warm_total,
        "ratio": num(b.ratio()),
        "cold_objective": num(b.cold_objective),
        "warm_objective": num(b.warm_objective),
        "objective_gap": num(b.objective_gap()),
        "cold_status": b.cold_status,
        "warm_status": b.warm_status,
        "cold_seconds": num(b.cold_seconds),
        "warm_seconds": num(b.warm_seconds),
        "cold_inner": b.cold,
        "warm_inner": b.warm,
        "cold_solve": solve_summary(&cold.report),
        "warm_solve": solve_summary(&warm.report),
    });
    Ok(Output { exit, report: envelope("bench-warmstart", exit, body), trace: Some(b.to_csv().into_bytes()) })
}

/// Creates an output file up front so an unwritable path fails before the
/// solve.
pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn write_all(w: &mut impl Write, bytes: &[u8], path: &Path) -> Result<(), CliError> {
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}
