//! Rate-distortion-cost computation for source coding with decoder actions.
//!
//! The decoder picks actions that control how much side information it gets,
//! under an average cost budget. [`solver`] computes `R(D,C)` by alternating
//! minimization over Shannon strategies ([`strategy`]); [`scenario`] holds
//! problem instances, including the erasure example and its closed-form
//! reference.

pub mod error;
pub mod prob;
pub mod scenario;
pub mod solver;
pub mod strategy;

pub use error::{Error, Result};
pub use prob::{build_joint, h2, kl_divergence, ConditionalPmf, JointPmf, Pmf};
pub use scenario::{analytic_rdc, build_erasure, classic_rd, ActionChannel, Alphabets, ErasureParams, ScenarioInstance};
pub use solver::{
    d_max, evaluate_rdc, nonadaptive_curve, solve_point, sweep, RdcCurve, RdcPoint, RdcProblem, SolverParams,
    StepRule,
};
pub use strategy::{enumerate_strategies, Pruning, ShannonStrategy, StrategySpace};
