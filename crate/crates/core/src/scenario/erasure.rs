//! The erasure example: `K` relevant letters plus one irrelevant letter, and a
//! decoder that pays one unit to observe the source through an erasure channel.

use serde::{Deserialize, Serialize};

use super::{ActionChannel, Alphabets, ScenarioInstance};
use crate::error::{Error, Result};
use crate::prob::{h2, Pmf};
use crate::solver::{solve_for_distortion, zero_rate_distortion, RdcProblem, SolverParams};
use crate::strategy::Pruning;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureParams {
    /// Number of relevant letters.
    pub k: usize,
    /// Mass of the irrelevant letter.
    pub q: f64,
    /// Erasure probability of the measured side information.
    pub p: f64,
    /// Cost budget (fraction of samples that may be measured).
    pub c: f64,
}

impl ErasureParams {
    pub fn new(k: usize, q: f64, p: f64, c: f64) -> Result<Self> {
        let params = Self { k, q, p, c };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidScenario("K must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidScenario(format!("q = {} not in [0,1]", self.q)));
        }
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::InvalidScenario(format!("p = {} not in [0,1)", self.p)));
        }
        if !(0.0..=1.0).contains(&self.c) {
            return Err(Error::InvalidScenario(format!("C = {} not in [0,1]", self.c)));
        }
        Ok(())
    }
}

/// `X = {1..K+1}`, `Y = X ∪ {e}`, `A = {0,1}`, `X̂ = X`.
///
/// Action 0 always yields `e`; action 1 passes `x` through an erasure channel
/// with erasure probability `p`. Distortion is 1 only for a wrong guess of a
/// relevant letter, and `Δ(a) = 1{a = 1}`.
pub fn build_erasure(params: &ErasureParams) -> Result<ScenarioInstance> {
    params.validate()?;
    let k = params.k;
    let nx = k + 1;
    let x: Vec<String> = (1..=nx).map(|i| i.to_string()).collect();
    let mut y = x.clone();
    y.push("e".into());
    let alphabets = Alphabets {
        x: x.clone(),
        y,
        a: vec!["0".into(), "1".into()],
        xhat: x,
    };
    let mut probs = vec![(1.0 - params.q) / k as f64; k];
    probs.push(params.q);
    let px = Pmf::from_weights(&probs)?;
    let erase = nx;
    let off: Vec<Vec<f64>> = (0..nx)
        .map(|_| {
            let mut row = vec![0.0; nx + 1];
            row[erase] = 1.0;
            row
        })
        .collect();
    let on: Vec<Vec<f64>> = (0..nx)
        .map(|i| {
            let mut row = vec![0.0; nx + 1];
            row[i] = 1.0 - params.p;
            row[erase] += params.p;
            row
        })
        .collect();
    let channel = ActionChannel::new(&[off, on])?;
    let distortion = (0..nx)
        .map(|i| (0..nx).map(|j| if i != j && i < k { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(ScenarioInstance::new(alphabets, px, channel, distortion, vec![0.0, 1.0])?
        .with_name(format!("erasure K={} q={} p={}", k, params.q, params.p)))
}

/// Classical `R(D)` of a source with `k` equiprobable relevant letters of
/// total mass `1 − w` and one irrelevant letter of mass `w`, under the
/// erasure-example distortion.
///
/// The irrelevant letter can share any codeword at no cost, so this is the
/// `k`-ary symmetric curve scaled by `1 − w` at normalized distortion
/// `D / (1 − w)`.
pub fn symmetric_rd(d: f64, k: usize, w: f64) -> f64 {
    let relevant = 1.0 - w;
    if relevant <= 0.0 || k <= 1 {
        return 0.0;
    }
    let delta = (d / relevant).max(0.0);
    let kf = k as f64;
    if delta >= (kf - 1.0) / kf {
        return 0.0;
    }
    (relevant * (kf.log2() - h2(delta) - delta * (kf - 1.0).log2())).max(0.0)
}

/// Classical rate-distortion function, computed with the solver restricted to
/// one action and no side information. `distortion[x][xhat]`.
pub fn classic_rd(d: f64, px: &Pmf, distortion: &[Vec<f64>]) -> Result<f64> {
    let nx = px.len();
    let nxh = distortion.first().map_or(0, Vec::len);
    let alphabets = Alphabets {
        x: (0..nx).map(|i| i.to_string()).collect(),
        y: vec!["-".into()],
        a: vec!["-".into()],
        xhat: (0..nxh).map(|i| i.to_string()).collect(),
    };
    let channel = ActionChannel::new(&[vec![vec![1.0]; nx]])?;
    let scenario = ScenarioInstance::new(alphabets, px.clone(), channel, distortion.to_vec(), vec![0.0])?;
    if d >= zero_rate_distortion(&scenario, 0) {
        return Ok(0.0);
    }
    let params = SolverParams {
        outer_tol: 1e-12,
        max_outer: 20_000,
        ..SolverParams::default()
    };
    let problem = RdcProblem::new(&scenario, Pruning::None, params.strategy_cap)?;
    solve_for_distortion(&problem, d, 0.0, &params).map(|(rate, _)| rate)
}

const GAMMA_STEP: f64 = 1e-3;
const GAMMA_REFINE: usize = 60;

/// Closed-form reference for the erasure example without erasures (`p = 0`):
/// a one-dimensional minimization over the irrelevant letter's probability
/// `γ` of being observed,
/// `R(D,C) = min_γ I(X;A) + (1 − C) R̄(D/(1 − C), P_{X|A=0})`.
///
/// The budget is assumed active (`P_A(1) = C`). `γ` is scanned on a `1e-3`
/// grid over its feasible interval and then refined by golden section.
pub fn analytic_rdc(d: f64, c: f64, k: usize, q: f64) -> Result<f64> {
    if k == 0 || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParams(format!("need K >= 1 and q in [0,1] (K = {k}, q = {q})")));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParams(format!("C = {c} not in [0,1]")));
    }
    if d < 0.0 || d.is_nan() {
        return Err(Error::InfeasibleTarget(format!("distortion {d} is negative")));
    }
    if c >= 1.0 - 1e-12 || q >= 1.0 {
        return Ok(0.0);
    }
    let idle = 1.0 - c;
    if q == 0.0 {
        return Ok(idle * symmetric_rd(d / idle, k, 0.0));
    }
    let objective = |gamma: f64| {
        // P(A=1 | relevant letter), clamped against rounding at the interval ends
        let on_rel = ((c - q * gamma) / (1.0 - q)).clamp(0.0, 1.0);
        let i_xa = h2(c) - (1.0 - q) * h2(on_rel) - q * h2(gamma);
        let irrelevant_idle = q * (1.0 - gamma) / idle;
        i_xa.max(0.0) + idle * symmetric_rd(d / idle, k, irrelevant_idle.clamp(0.0, 1.0))
    };
    let lo = ((c - 1.0 + q) / q).max(0.0);
    let hi = (c / q).min(1.0);
    let steps = (((hi - lo) / GAMMA_STEP).ceil() as usize).max(1);
    let mut best = (f64::INFINITY, lo);
    for i in 0..=steps {
        let g = lo + (hi - lo) * i as f64 / steps as f64;
        let v = objective(g);
        if v < best.0 {
            best = (v, g);
        }
    }
    let width = (hi - lo) / steps as f64;
    let (mut a, mut b) = ((best.1 - width).max(lo), (best.1 + width).min(hi));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..GAMMA_REFINE {
        let x1 = b - r * (b - a);
        let x2 = a + r * (b - a);
        let (f1, f2) = (objective(x1), objective(x2));
        best.0 = best.0.min(f1).min(f2);
        if f1 < f2 {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(best.0.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example_instance(p: f64) -> ScenarioInstance {
        build_erasure(&ErasureParams::new(4, 0.5, p, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn source_pmf_matches_example() {
        let s = example_instance(0.0);
        assert_eq!(s.px().probs(), &[0.125, 0.125, 0.125, 0.125, 0.5]);
        assert_eq!((s.num_x(), s.num_y(), s.num_a(), s.num_xhat()), (5, 6, 2, 5));
    }

    #[test]
    fn channel_rows() {
        let s = example_instance(0.0);
        for x in 0..5 {
            assert_eq!(s.channel().prob(x, 1, x), 1.0);
            assert_eq!(s.channel().prob(x, 0, 5), 1.0);
        }
        let noisy = example_instance(0.1);
        assert_abs_diff_eq!(noisy.channel().prob(2, 1, 2), 0.9);
        assert_abs_diff_eq!(noisy.channel().prob(2, 1, 5), 0.1);
    }

    #[test]
    fn irrelevant_letter_is_free() {
        let s = example_instance(0.0);
        for xh in 0..5 {
            assert_eq!(s.distortion(4, xh), 0.0);
        }
        assert_eq!(s.distortion(0, 1), 1.0);
        assert_eq!(s.distortion(0, 0), 0.0);
        assert_eq!(s.costs(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ErasureParams::new(0, 0.5, 0.0, 0.5).is_err());
        assert!(ErasureParams::new(4, 1.5, 0.0, 0.5).is_err());
        assert!(ErasureParams::new(4, 0.5, 1.0, 0.5).is_err());
        assert!(ErasureParams::new(4, 0.5, 0.0, -0.1).is_err());
    }

    #[test]
    fn symmetric_rd_reduces_to_binary() {
        // K = 2, no irrelevant letter: 1 - h2(D)
        assert_abs_diff_eq!(symmetric_rd(0.25, 2, 0.0), 1.0 - h2(0.25), epsilon = 1e-15);
        assert_eq!(symmetric_rd(0.5, 2, 0.0), 0.0);
        assert_abs_diff_eq!(symmetric_rd(0.0, 4, 0.5), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_corner_cases() {
        assert_eq!(analytic_rdc(0.0, 1.0, 4, 0.5).unwrap(), 0.0);
        // C = 0: classical curve of the full source
        let r = analytic_rdc(0.1, 0.0, 4, 0.5).unwrap();
        assert_abs_diff_eq!(r, symmetric_rd(0.1, 4, 0.5), epsilon = 1e-12);
        assert!(analytic_rdc(-0.1, 0.5, 4, 0.5).is_err());
        assert!(analytic_rdc(0.1, 1.5, 4, 0.5).is_err());
    }

    #[test]
    fn analytic_is_monotone_in_budget() {
        let mut prev = f64::INFINITY;
        for c in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let r = analytic_rdc(0.05, c, 4, 0.5).unwrap();
            assert!(r <= prev + 1e-12);
            prev = r;
        }
    }

    #[test]
    fn classic_rd_binary_hamming() {
        let px = Pmf::uniform(2);
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let r = classic_rd(0.25, &px, &d).unwrap();
        assert_abs_diff_eq!(r, 1.0 - h2(0.25), epsilon = 1e-6);
        assert_eq!(classic_rd(0.5, &px, &d).unwrap(), 0.0);
    }
}
