use l1gn::gn::{gn_solve, Acceptance, GnConfig, PenaltyWeights, RegParams, SolveReport, Strategy};
use l1gn::subsolver::{AdmmSettings, RhoPolicy};
use serde::{Deserialize, Serialize};

use crate::error::BmiError;
use crate::instance::BmiInstance;
use crate::problem::{build_bmi_problem, spectral_start, BmiIndex, BmiProblem, BmiSettings};
use crate::verify::{verify_bmi_solution, BmiVerification};

/// Outer-loop settings for the BMI solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmiTuning {
    pub problem: BmiSettings,
    pub mu: f64,
    /// Start each line search from the last accepted `L` instead of `L₀`.
    pub carry_over: bool,
    /// On a failed model test raise `L` on the `P` slice only. `Ψ` is linear
    /// in `(t, F, S)` for fixed `P`, so the model error comes from `P` steps.
    pub split_l: bool,
    pub tol_feas: f64,
    pub tol_step: f64,
    pub max_iter: usize,
    pub require_stationarity: bool,
    pub warm_start: bool,
}

impl Default for BmiTuning {
    fn default() -> Self {
        BmiTuning {
            problem: BmiSettings::default(),
            mu: 2.0,
            carry_over: true,
            split_l: false,
            tol_feas: 1e-6,
            tol_step: 1e-6,
            max_iter: 100,
            require_stationarity: false,
            warm_start: true,
        }
    }
}

impl BmiTuning {
    /// Runs on to a stationary point instead of stopping at the first
    /// feasible iterate, with `L` raised on the `P` slice only.
    pub fn optimal() -> Self {
        BmiTuning { split_l: true, require_stationarity: true, ..BmiTuning::default() }
    }

    pub fn gn_config(&self) -> Result<GnConfig<f64>, BmiError> {
        let weights = PenaltyWeights::new(vec![self.problem.beta])?;
        let reg = RegParams::new(vec![self.problem.l0; 4], Strategy::Geometric { mu: self.mu }, self.carry_over)?;
        let mut c = GnConfig::new(weights, reg);
        if self.split_l {
            c.acceptance = Acceptance { global_update: Some(vec![BmiIndex::SLICE_P]), ..Acceptance::default() };
        }
        c.tol_feas = self.tol_feas;
        c.tol_step = self.tol_step;
        c.max_iter = self.max_iter;
        c.require_stationarity = self.require_stationarity;
        c.warm_start = self.warm_start;
        c.seed = self.problem.seed;
        c.admm = AdmmSettings {
            eps_abs: 1e-10,
            eps_rel: 1e-10,
            max_iter: 100_000,
            rho_policy: RhoPolicy::Adaptive { interval: 50, factor: 5.0 },
            ..AdmmSettings::default()
        };
        c.accept_inexact = true;
        Ok(c)
    }
}

pub struct BmiRun {
    pub problem: BmiProblem,
    pub x0: Vec<f64>,
    pub report: SolveReport<f64>,
    pub verification: BmiVerification,
}

pub fn solve_bmi(inst: &BmiInstance, tuning: &BmiTuning) -> Result<BmiRun, BmiError> {
    solve_bmi_with(inst, tuning, |_| {})
}

/// As [`solve_bmi`], letting the caller adjust the solver configuration.
pub fn solve_bmi_with(
    inst: &BmiInstance,
    tuning: &BmiTuning,
    adjust: impl FnOnce(&mut GnConfig<f64>),
) -> Result<BmiRun, BmiError> {
    let problem = build_bmi_problem(inst, &tuning.problem)?;
    let x0 = spectral_start(inst)?;
    let mut config = tuning.gn_config()?;
    adjust(&mut config);
    let report = gn_solve(&problem, &config, &x0)?;
    let verification = verify_bmi_solution(&problem, &report.x);
    Ok(BmiRun { problem, x0, report, verification })
}
