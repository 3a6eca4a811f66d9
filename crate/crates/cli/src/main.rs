//! `l1gn`: solve AC-OPF cases and BMI instances, benchmark warm starts.
//!
//! Exit codes: 0 converged, 1 iteration limit, stall or solver failure,
//! 2 usage or input error. Log verbosity comes from `L1GN_LOG`.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command, Common};
use crate::commands::{create, write_all, Output};
use crate::report::CliError;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("L1GN_LOG", "warn")).init();
    let cli = Cli::parse();
    let common = match &cli.cmd {
        Command::SolveOpf(a) | Command::BenchWarmstart(a) => &a.common,
        Command::SolveBmi(a) => &a.common,
    };
    let code = match run(&cli.cmd, common) {
        Ok(code) => code,
        Err(e) => {
            stdout_line(&e.to_json().to_string());
            e.code
        }
    };
    ExitCode::from(code as u8)
}

fn run(cmd: &Command, common: &Common) -> Result<i32, CliError> {
    let mut report_file = common.report.as_deref().map(create).transpose()?;
    let mut trace_file = common.trace.as_deref().map(create).transpose()?;
    let out: Output = match cmd {
        Command::SolveOpf(a) => commands::solve_opf(a)?,
        Command::SolveBmi(a) => commands::solve_bmi(a)?,
        Command::BenchWarmstart(a) => commands::bench(a)?,
    };
    if let (Some(w), Some(bytes), Some(path)) = (trace_file.as_mut(), &out.trace, &common.trace) {
        write_all(w, bytes, path)?;
    }
    let text = serde_json::to_string_pretty(&out.report).expect("report serializes");
    match (report_file.as_mut(), &common.report) {
        (Some(w), Some(path)) => write_all(w, format!("{text}\n").as_bytes(), path)?,
        _ => stdout_line(&text),
    }
    Ok(out.exit)
}

/// A closed pipe on stdout is not an error worth panicking over.
fn stdout_line(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}
