use std::fmt::Write as _;

use rayon::prelude::*;

use super::design::{trial_seed, Design};
use super::pipeline::{decode, demux, encode, sample_source, SideInfoOracle};
use crate::error::{CodeError, Result};

/// z-value of the two-sided 95% normal interval.
const Z95: f64 = 1.96;

/// One simulated block. Averages run over the `n` source positions;
/// padding never enters them.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub trial: usize,
    pub n: usize,
    pub rate: f64,
    pub distortion: f64,
    pub cost: f64,
    /// Share of padded branch positions that carried no source symbol.
    pub padding_fraction: f64,
    /// Padding overflows plus branches where the Wyner-Ziv decoder picked a
    /// codeword other than the one sent.
    pub failures: usize,
    /// In-bin ties resolved by lowest index.
    pub ambiguities: usize,
    /// Total variation between the action type and `P_A`.
    pub action_tv: f64,
    pub forced_fraction: f64,
    /// `false` when the trial was discarded (padding overflow).
    pub completed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub trials: usize,
    pub completed: usize,
    pub failures: usize,
    pub rate: f64,
    pub distortion: f64,
    pub cost: f64,
    pub action_tv: f64,
    pub padding_fraction: f64,
    /// 95% normal-approximation half-widths.
    pub distortion_hw: f64,
    pub cost_hw: f64,
    pub action_tv_hw: f64,
}

impl Aggregate {
    /// Conservative converse check: the design rate must not fall below the
    /// bound `r(D, C)` evaluated at the empirical point pushed out by three
    /// half-widths (which can only lower the bound).
    pub fn converse_safe(&self, bound: impl Fn(f64, f64) -> f64) -> bool {
        let floor = bound(self.distortion + 3.0 * self.distortion_hw, self.cost + 3.0 * self.cost_hw);
        self.rate >= floor - 1e-9
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub trials: Vec<TrialReport>,
    pub aggregate: Aggregate,
}

/// Encodes and decodes one source block.
pub fn run_trial(design: &Design, trial: usize, seed: u64) -> Result<TrialReport> {
    let n = design.n;
    let source = sample_source(design, trial_seed(seed, trial as u64, 0));
    let discarded = TrialReport {
        trial,
        n,
        rate: design.rate(),
        distortion: f64::NAN,
        cost: f64::NAN,
        padding_fraction: f64::NAN,
        failures: 1,
        ambiguities: 0,
        action_tv: f64::NAN,
        forced_fraction: 0.0,
        completed: false,
    };
    let (message, state) = match encode(&source, design, trial_seed(seed, trial as u64, 1)) {
        Ok(out) => out,
        Err(CodeError::PaddingOverflow { .. }) => return Ok(discarded),
        Err(e) => return Err(e),
    };
    let oracle = SideInfoOracle::new(design.scenario.channel().clone(), trial_seed(seed, trial as u64, 2));
    let side = oracle.observe(&source, &state.actions);
    let mut decoded = decode(&message, &side, design)?;
    debug_assert_eq!(decoded.actions, state.actions);

    let sc = &design.scenario;
    // a branch decoded to the wrong codeword falls back to the best guess
    // that uses neither message nor side information
    let fallback = sc.bayes_recon(sc.px().probs());
    let mut failures = 0;
    for (a, (d, e)) in decoded.codewords.iter().zip(&state.codewords).enumerate() {
        if d != e {
            failures += 1;
            for i in demux(&decoded.actions, a) {
                decoded.estimate[i] = fallback;
            }
        }
    }
    let distortion = source
        .iter()
        .zip(&decoded.estimate)
        .map(|(&x, &xh)| sc.distortion(x, xh))
        .sum::<f64>()
        / n as f64;
    let cost = decoded.actions.iter().map(|&a| sc.cost(a)).sum::<f64>() / n as f64;
    let mut counts = vec![0usize; design.pa.len()];
    for &a in &decoded.actions {
        counts[a] += 1;
    }
    let action_tv = 0.5
        * counts
            .iter()
            .zip(&design.pa)
            .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
            .sum::<f64>();
    let padded: usize = design.branches.iter().map(|b| b.padded_len).sum();
    Ok(TrialReport {
        trial,
        n,
        rate: design.rate(),
        distortion,
        cost,
        padding_fraction: (padded - n) as f64 / padded as f64,
        failures,
        ambiguities: decoded.ambiguities,
        action_tv,
        forced_fraction: state.forced_fraction,
        completed: true,
    })
}

fn mean_hw(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, Z95 * (var / k).sqrt())
}

/// Runs `trials` independent blocks (in parallel) and averages them.
pub fn evaluate(design: &Design, trials: usize, seed: u64) -> Result<Evaluation> {
    if trials == 0 {
        return Err(CodeError::InvalidParams("need at least one trial".into()));
    }
    let reports = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(design, t, seed))
        .collect::<Result<Vec<_>>>()?;
    let done: Vec<&TrialReport> = reports.iter().filter(|r| r.completed).collect();
    let pick = |f: fn(&TrialReport) -> f64| mean_hw(&done.iter().map(|r| f(r)).collect::<Vec<_>>());
    let (distortion, distortion_hw) = pick(|r| r.distortion);
    let (cost, cost_hw) = pick(|r| r.cost);
    let (action_tv, action_tv_hw) = pick(|r| r.action_tv);
    let (padding_fraction, _) = pick(|r| r.padding_fraction);
    let aggregate = Aggregate {
        trials,
        completed: done.len(),
        failures: reports.iter().map(|r| r.failures).sum(),
        rate: design.rate(),
        distortion,
        cost,
        action_tv,
        padding_fraction,
        distortion_hw,
        cost_hw,
        action_tv_hw,
    };
    Ok(Evaluation {
        trials: reports,
        aggregate,
    })
}

/// One row per trial plus an `aggregate` row.
pub fn trials_csv(eval: &Evaluation) -> String {
    let mut out = String::from("trial,n,rate,distortion,cost,padding_fraction,failures\n");
    for r in &eval.trials {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{}",
            r.trial, r.n, r.rate, r.distortion, r.cost, r.padding_fraction, r.failures
        )
        .unwrap();
    }
    let a = &eval.aggregate;
    let n = eval.trials.first().map_or(0, |r| r.n);
    writeln!(
        out,
        "aggregate,{n},{:.6},{:.6},{:.6},{:.6},{}",
        a.rate, a.distortion, a.cost, a.padding_fraction, a.failures
    )
    .unwrap();
    out
}
