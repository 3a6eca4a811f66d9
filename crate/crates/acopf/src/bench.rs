//! Inner-iteration counts with and without warm-started subproblems.

use serde::{Deserialize, Serialize};

use crate::case::NetworkModel;
use crate::error::OpfError;
use crate::run::{finish, prepare, OpfRun};
use crate::tuning::Tuning;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarmstartBench {
    pub case: String,
    /// ADMM iterations per outer iteration, cold inner solves.
    pub cold: Vec<usize>,
    /// Same, warm-started, on the replayed `L` schedule.
    pub warm: Vec<usize>,
    pub cold_total: usize,
    pub warm_total: usize,
    pub cold_objective: f64,
    pub warm_objective: f64,
    pub cold_status: String,
    pub warm_status: String,
    pub cold_seconds: f64,
    pub warm_seconds: f64,
}

impl WarmstartBench {
    pub fn ratio(&self) -> f64 {
        self.warm_total as f64 / self.cold_total.max(1) as f64
    }

    pub fn objective_gap(&self) -> f64 {
        (self.warm_objective - self.cold_objective).abs() / self.cold_objective.abs().max(1.0)
    }

    /// `k,cold_inner,warm_inner` per outer iteration.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,cold_inner,warm_inner\n");
        for k in 0..self.cold.len().max(self.warm.len()) {
            let cell = |v: &[usize]| v.get(k).map_or(String::new(), |n| n.to_string());
            out.push_str(&format!("{},{},{}\n", k + 1, cell(&self.cold), cell(&self.warm)));
        }
        out
    }
}

/// Drops every line limit, then solves twice: cold inner solves with the
/// usual `L` search, and warm-started inner solves replaying the `L` values
/// the cold run tried, so both runs follow the same outer trajectory.
pub fn bench_warmstart(model: &NetworkModel, tuning: &Tuning) -> Result<(WarmstartBench, OpfRun, OpfRun), OpfError> {
    let mut model = model.clone();
    model.branches.iter_mut().for_each(|b| b.rate_a = 0.0);
    let tuning = Tuning { lazy: false, ..tuning.clone() };
    let (problem, init) = prepare(&model, &tuning)?;

    let mut config = tuning.gn_config()?;
    config.warm_start = false;
    config.restart_cap = 0;
    let cold = finish(problem.clone(), init.clone(), config.clone())?;

    config.warm_start = true;
    config.replay = Some(cold.report.l_trials.clone());
    let warm = finish(problem, init, config)?;

    let per_iter = |r: &OpfRun| r.report.trace.iter().map(|t| t.inner_iters).collect::<Vec<_>>();
    let bench = WarmstartBench {
        case: model.name.clone(),
        cold: per_iter(&cold),
        warm: per_iter(&warm),
        cold_total: cold.report.inner_iterations_total,
        warm_total: warm.report.inner_iterations_total,
        cold_objective: cold.cost,
        warm_objective: warm.cost,
        cold_status: cold.report.status.name().into(),
        warm_status: warm.report.status.name().into(),
        cold_seconds: cold.report.wall_time,
        warm_seconds: warm.report.wall_time,
    };
    Ok((bench, cold, warm))
}
