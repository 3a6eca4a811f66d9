use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use l1gn::gn::Strategy;

#[derive(Parser, Debug)]
#[command(name = "l1gn", version, about = "Gauss-Newton exact-penalty solver for AC-OPF and BMI problems")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a MATPOWER case.
    SolveOpf(OpfArgs),
    /// Solve a spectral-abscissa BMI instance.
    SolveBmi(BmiArgs),
    /// Compare inner iterations with cold and warm-started subproblems.
    BenchWarmstart(OpfArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Fixed,
    Bisection,
    Geometric,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BmiMode {
    /// Stop at the first feasible iterate.
    Feasible,
    /// Continue to a stationary point.
    Optimal,
}

/// Options shared by every subcommand. Unset tolerances and limits keep the
/// frontend defaults.
#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum, default_value = "geometric")]
    pub strategy: StrategyArg,
    /// Growth factor of `L` for the geometric strategy.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub mu: f64,
    /// Feasibility tolerance on each residual class [OPF 1e-5, BMI 1e-6].
    #[arg(long, allow_hyphen_values = true)]
    pub tol_feas: Option<f64>,
    /// Step-length tolerance [1e-6].
    #[arg(long, allow_hyphen_values = true)]
    pub tol_step: Option<f64>,
    /// Outer iteration limit [100].
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum, default_value = "on")]
    pub warmstart: Switch,
    /// Restarts with doubled penalty weights before giving up [5].
    #[arg(long)]
    pub restart_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON path; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Trace CSV path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OpfArgs {
    /// MATPOWER case file.
    #[arg(long)]
    pub case: PathBuf,
    /// Penalty weight on the trigonometric residuals [number of branches].
    #[arg(long, allow_hyphen_values = true)]
    pub beta_t: Option<f64>,
    /// `β_q / β_t`.
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub beta_q_factor: f64,
    /// Only near-binding line limits enter the subproblems.
    #[arg(long, value_enum, default_value = "off")]
    pub lazy: Switch,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct BmiArgs {
    /// Instance JSON with matrices `a`, `b`, `c`; the bundled instance when absent.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Penalty weight [1000].
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, value_enum, default_value = "feasible")]
    pub bmi_mode: BmiMode,
    #[command(flatten)]
    pub common: Common,
}

impl Common {
    pub fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyArg::Fixed => Strategy::Fixed,
            StrategyArg::Bisection => Strategy::Bisection,
            StrategyArg::Geometric => Strategy::Geometric { mu: self.mu },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.mu > 1.0) {
            return Err(format!("--mu must be greater than 1, got {}", self.mu));
        }
        for (name, v) in [("--tol-feas", self.tol_feas), ("--tol-step", self.tol_step)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(format!("{name} must be positive, got {v}"));
                }
            }
        }
        Ok(())
    }
}

impl OpfArgs {
    pub fn validate(&self) -> Result<(), String> {
        self.common.validate()?;
        if let Some(b) = self.beta_t {
            if !(b > 0.0 && b.is_finite()) {
                return Err(format!("--beta-t must be positive, got {b}"));
            }
        }
        if !(self.beta_q_factor > 0.0 && self.beta_q_factor.is_finite()) {
            return Err(format!("--beta-q-factor must be positive, got {}", self.beta_q_factor));
        }
        Ok(())
    }
}

impl BmiArgs {
    pub fn validate(&self) -> Result<(), String> {
        self.common.validate()?;
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(format!("--beta must be positive, got {b}"));
            }
        }
        Ok(())
    }
}
