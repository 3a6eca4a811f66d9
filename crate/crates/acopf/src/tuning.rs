//! Penalty weights, proximal weights and solver settings for AC-OPF.

use l1gn::gn::{Acceptance, GnConfig, PenaltyWeights, RegParams, SplitRule, Strategy};
use l1gn::subsolver::{AdmmSettings, RhoPolicy};
use serde::{Deserialize, Serialize};

use crate::case::NetworkModel;
use crate::error::OpfError;
use crate::formulation::{CLASS_QUAD, CLASS_TRIG, SLICE_CS, SLICE_THETA};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub beta_t: f64,
    pub beta_q: f64,
    /// Fixed proximal weight on the dispatch variables.
    pub l_pq: f64,
    pub l_cs_min: f64,
    pub l_theta_min: f64,
    #[serde(with = "strategy_serde")]
    pub strategy: Strategy,
    pub carry_over: bool,
    /// Per-class acceptance rules ahead of the global model test.
    pub split_cascade: bool,
    /// ε₁: stall threshold on the step length.
    pub tol_step: f64,
    /// ε₂: feasibility tolerance on each residual class.
    pub tol_feas: f64,
    pub max_iter: usize,
    pub restart_cap: usize,
    pub lazy: bool,
    pub lazy_margin: f64,
    pub warm_start: bool,
    pub seed: u64,
    /// Objective divisor; costs are in $/h. `None` derives it from the
    /// relaxation duals, see [`relaxation_cost_scale`].
    pub cost_scale: Option<f64>,
    /// Target ratio `β_q / max dual` used when deriving the cost scale.
    pub dual_margin: f64,
    /// Angle differences are kept within `±(π/2 − angle_margin)`.
    pub angle_margin: f64,
}

mod strategy_serde {
    use l1gn::gn::Strategy;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        name: String,
        mu: Option<f64>,
    }

    pub fn serialize<S: Serializer>(s: &Strategy, ser: S) -> Result<S::Ok, S::Error> {
        let mu = if let Strategy::Geometric { mu } = s { Some(*mu) } else { None };
        Repr { name: s.name().into(), mu }.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Strategy, D::Error> {
        let r = Repr::deserialize(de)?;
        match r.name.as_str() {
            "fixed" => Ok(Strategy::Fixed),
            "bisection" => Ok(Strategy::Bisection),
            "geometric" => Ok(Strategy::Geometric { mu: r.mu.unwrap_or(2.0) }),
            n => Err(serde::de::Error::custom(format!("unknown strategy '{n}'"))),
        }
    }
}

pub fn default_tuning(model: &NetworkModel) -> Tuning {
    let beta_t = model.branches.len().max(1) as f64;
    let beta_q = 5.0 * beta_t;
    Tuning {
        beta_t,
        beta_q,
        l_pq: 1.0,
        l_cs_min: beta_q / beta_t,
        l_theta_min: 1.0,
        strategy: Strategy::Geometric { mu: 2.0 },
        carry_over: true,
        split_cascade: true,
        tol_step: 1e-6,
        tol_feas: 1e-5,
        max_iter: 100,
        restart_cap: 5,
        lazy: false,
        lazy_margin: 0.05,
        warm_start: true,
        seed: 0,
        cost_scale: None,
        dual_margin: 2.0,
        angle_margin: 1e-3,
    }
}

impl Tuning {
    /// Sets `β_q = factor·β_t` and the matching `L_cs,min = factor`.
    pub fn with_beta(mut self, beta_t: f64, q_factor: f64) -> Self {
        self.beta_t = beta_t;
        self.beta_q = q_factor * beta_t;
        self.l_cs_min = q_factor;
        self
    }

    pub fn gn_config(&self) -> Result<GnConfig<f64>, OpfError> {
        let mut beta = vec![0.0; 2];
        beta[CLASS_QUAD] = self.beta_q;
        beta[CLASS_TRIG] = self.beta_t;
        let weights = PenaltyWeights::new(beta)?;
        let reg = RegParams::new(vec![self.l_pq, self.l_cs_min, self.l_theta_min], self.strategy, self.carry_over)?;
        let mut config = GnConfig::new(weights, reg);
        config.acceptance = if self.split_cascade {
            Acceptance {
                cascade: vec![
                    SplitRule {
                        class: CLASS_TRIG,
                        prox_slices: vec![SLICE_CS, SLICE_THETA],
                        update_slices: vec![SLICE_CS, SLICE_THETA],
                    },
                    SplitRule { class: CLASS_QUAD, prox_slices: vec![SLICE_CS], update_slices: vec![SLICE_CS] },
                ],
                relaxed_precheck: true,
                global_update: Some(vec![SLICE_CS, SLICE_THETA]),
            }
        } else {
            Acceptance {
                cascade: Vec::new(),
                relaxed_precheck: false,
                global_update: Some(vec![SLICE_CS, SLICE_THETA]),
            }
        };
        config.tol_feas = self.tol_feas;
        config.tol_step = self.tol_step;
        config.max_iter = self.max_iter;
        config.restart_cap = self.restart_cap;
        config.warm_start = self.warm_start;
        config.seed = self.seed;
        config.admm = subproblem_admm();
        config.accept_inexact = true;
        Ok(config)
    }
}

/// ADMM settings for the GN subproblems.
pub fn subproblem_admm() -> AdmmSettings {
    AdmmSettings {
        eps_abs: 1e-8,
        eps_rel: 1e-8,
        max_iter: 100_000,
        rho_policy: RhoPolicy::Adaptive { interval: 50, factor: 5.0 },
        ..AdmmSettings::default()
    }
}

/// Objective divisor that puts the largest multiplier estimate of the
/// quadratic residuals at `β_q / dual_margin`.
///
/// The relaxation duals of `c_ij² + s_ij² ≤ c_ii c_jj` approximate the
/// multipliers of the quadratic residuals at a nearby local solution, and the
/// ℓ1 penalty is exact only when `β_q` exceeds them. `duals` must come from a
/// relaxation solved with the objective unscaled. Never below 1.
pub fn relaxation_cost_scale(duals: &[f64], tuning: &Tuning) -> f64 {
    let biggest = duals.iter().fold(0.0f64, |m, &d| m.max(d));
    (tuning.dual_margin * biggest / tuning.beta_q).max(1.0)
}
