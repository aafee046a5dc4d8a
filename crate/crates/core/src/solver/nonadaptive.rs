//! Baseline with actions chosen independently of the source.
//!
//! With `A ⊥ X` the rate is `Σ_a P_A(a) I(X;T|Y,A=a)`, so the problem splits
//! into one Wyner-Ziv problem per action. Each branch is traced with the
//! single-action solver on a shared `s` grid; a common slope across branches
//! is exactly the optimal distortion allocation for a given `P_A`.

use rayon::prelude::*;

use super::{RdcPoint, SolverParams};
use crate::error::{Error, Result};
use crate::scenario::ScenarioInstance;
use super::problem::RdcProblem;

#[derive(Clone, Debug)]
pub struct NonAdaptiveCurve {
    /// `branches[a][k]` is the single-action solution at `s_grid[k]`.
    pub branches: Vec<Vec<RdcPoint>>,
    pub costs: Vec<f64>,
    pub scenario_hash: String,
}

const GOLDEN_STEPS: usize = 80;

impl NonAdaptiveCurve {
    pub fn all_converged(&self) -> bool {
        self.branches.iter().flatten().all(|p| p.converged)
    }

    /// Rate at distortion `d` for a fixed action marginal `pa`.
    pub fn rate_for(&self, pa: &[f64], d: f64) -> f64 {
        let grid = self.branches.first().map_or(0, Vec::len);
        (0..grid)
            .map(|k| {
                let s = self.branches[0][k].s;
                let intercept: f64 = pa
                    .iter()
                    .zip(&self.branches)
                    .map(|(&w, br)| w * (br[k].rate - s * br[k].distortion))
                    .sum();
                intercept + s * d
            })
            .fold(0.0, f64::max)
    }

    /// `min_{P_A : E[Δ(A)] ≤ c} rate_for(P_A, d)`, searched over action
    /// marginals supported on at most two actions (exact for `|A| ≤ 2`).
    pub fn evaluate(&self, d: f64, c: f64) -> f64 {
        let na = self.costs.len();
        let mut best = f64::INFINITY;
        let mut pa = vec![0.0; na];
        for a in 0..na {
            if self.costs[a] > c {
                continue;
            }
            pa.iter_mut().for_each(|v| *v = 0.0);
            pa[a] = 1.0;
            best = best.min(self.rate_for(&pa, d));
            for b in 0..na {
                if b == a {
                    continue;
                }
                let upper = if self.costs[b] <= c {
                    1.0
                } else {
                    (c - self.costs[a]) / (self.costs[b] - self.costs[a])
                };
                let mut eval = |lambda: f64| {
                    pa.iter_mut().for_each(|v| *v = 0.0);
                    pa[a] = 1.0 - lambda;
                    pa[b] = lambda;
                    self.rate_for(&pa, d)
                };
                best = best.min(golden_min(&mut eval, 0.0, upper.clamp(0.0, 1.0)));
            }
        }
        best
    }
}

/// Golden-section minimum of a convex function on `[lo, hi]`, endpoints included.
pub(crate) fn golden_min(f: &mut impl FnMut(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut best = f(lo).min(f(hi));
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_STEPS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.min(fc).min(fd);
    }
    best
}

pub fn nonadaptive_curve(
    scenario: &ScenarioInstance,
    s_grid: &[f64],
    params: &SolverParams,
) -> Result<NonAdaptiveCurve> {
    if s_grid.is_empty() {
        return Err(Error::InvalidParams("empty s grid".into()));
    }
    let branches = (0..scenario.num_a())
        .map(|a| {
            let sub = scenario.restrict_to_action(a)?;
            let problem = RdcProblem::new(&sub, params.pruning, params.strategy_cap)?;
            s_grid
                .par_iter()
                .map(|&s| problem.solve(s, 0.0, params))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NonAdaptiveCurve {
        branches,
        costs: scenario.costs().to_vec(),
        scenario_hash: scenario.hash(),
    })
}
