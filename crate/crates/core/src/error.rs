use thiserror::Error;

use crate::prob::ConditionalPmf;

/// Errors raised by the probability core and the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unknown or overlapping axis labels: {0}")]
    AxisMismatch(String),

    #[error("absolute continuity violated at index {index}: p = {p} but q = 0")]
    AbsoluteContinuityViolation { index: usize, p: f64 },

    #[error("strategy space of size {count} exceeds the cap of {cap}")]
    SizeLimitExceeded { count: u128, cap: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),

    #[error("fixed-point iterate diverged (entry {value:e} exceeds 1e30)")]
    DivergenceDetected { value: f64 },

    #[error("{stage} did not converge within {iterations} iterations")]
    MaxIterations {
        stage: &'static str,
        iterations: usize,
        best: Option<Box<ConditionalPmf>>,
    },

    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    #[error("scenario file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
