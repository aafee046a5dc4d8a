//! Alternating minimization for `R(D,C)` with a dual fixed-point inner solver.

mod dmax;
mod inner;
mod nonadaptive;
mod outer;
mod problem;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::{Pruning, DEFAULT_STRATEGY_CAP};

pub use dmax::{d_max, zero_rate_distortion};
pub use inner::{fixed_point_step, inner_minimize, jacobian_inf_norm, log_map, InnerOutcome, InnerState};
pub use nonadaptive::{nonadaptive_curve, NonAdaptiveCurve};
pub use outer::{
    evaluate_rdc, geometric_grid, solve_for_distortion, solve_for_target, solve_point, solve_point_traced,
    sweep, SolveTrace, TargetSolution,
};
pub use problem::{compute_alphas, eval_f, f_terms, update_qa, update_qty, Alphas, FTerms, RdcProblem};

/// Update rule for the per-symbol dual variables `μ_x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// `μ_x += (1/i)/P(x) · (1 − Σ_a P(a|x))`: diminishing subgradient steps.
    Harmonic,
    /// `μ_x −= log2 Σ_a P(a|x)`: rescales each row straight onto the
    /// normalization constraint. Same fixed points, far fewer dual rounds.
    #[default]
    Normalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub beta: f64,
    pub step_rule: StepRule,
    pub outer_tol: f64,
    pub inner_tol: f64,
    pub fp_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub max_fp: usize,
    /// Reuse `μ` and `P_{A|X}` from the previous outer iteration.
    pub warm_start: bool,
    pub pruning: Pruning,
    pub strategy_cap: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            beta: 0.5,
            step_rule: StepRule::Normalized,
            outer_tol: 1e-8,
            inner_tol: 1e-7,
            fp_tol: 1e-10,
            max_outer: 500,
            max_inner: 2000,
            max_fp: 10_000,
            warm_start: true,
            pruning: Pruning::None,
            strategy_cap: DEFAULT_STRATEGY_CAP,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParams(format!("beta = {} not in (0,1)", self.beta)));
        }
        for (name, v) in [
            ("outer_tol", self.outer_tol),
            ("inner_tol", self.inner_tol),
            ("fp_tol", self.fp_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.max_fp == 0 {
            return Err(Error::InvalidParams("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_multipliers(s: f64, m: f64) -> Result<()> {
    if !(s <= 0.0 && s.is_finite()) || !(m <= 0.0 && m.is_finite()) {
        return Err(Error::InvalidParams(format!("multipliers must be finite and <= 0 (s = {s}, m = {m})")));
    }
    Ok(())
}

/// One `(R, D, C)` tuple produced by the solver at slopes `(s, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdcPoint {
    pub s: f64,
    pub m: f64,
    pub rate: f64,
    pub distortion: f64,
    pub cost: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl RdcPoint {
    /// Value of this point's supporting plane at `(d, c)`.
    #[inline]
    pub fn plane(&self, d: f64, c: f64) -> f64 {
        self.rate + self.s * (d - self.distortion) + self.m * (c - self.cost)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdcCurve {
    pub points: Vec<RdcPoint>,
    pub scenario_hash: String,
}

impl RdcCurve {
    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }
}
