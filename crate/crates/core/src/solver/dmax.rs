use crate::error::{Error, Result};
use crate::scenario::ScenarioInstance;

/// Smallest expected distortion of a single strategy with action `a`: every
/// `y` gets its Bayes reconstruction under `P_X(x) P_{Y|X,A}(y|x,a)`.
pub fn zero_rate_distortion(scenario: &ScenarioInstance, a: usize) -> f64 {
    let ch = scenario.channel();
    let px = scenario.px();
    (0..scenario.num_y())
        .map(|y| {
            (0..scenario.num_xhat())
                .map(|xh| {
                    (0..scenario.num_x())
                        .map(|x| px[x] * ch.prob(x, a, y) * scenario.distortion(x, xh))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// `D_max(C)`: the minimum of a linear objective over strategy mixtures with
/// one linear cost constraint. An optimum is supported on at most two
/// strategies, and within an action class the best strategy is the per-`y`
/// Bayes rule, so it suffices to scan single actions within budget and every
/// pair of actions whose costs straddle `C`.
pub fn d_max(scenario: &ScenarioInstance, c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidParams(format!("cost budget {c} must be >= 0")));
    }
    let na = scenario.num_a();
    let v: Vec<f64> = (0..na).map(|a| zero_rate_distortion(scenario, a)).collect();
    let cost = scenario.costs();
    let mut best = f64::INFINITY;
    for a in 0..na {
        if cost[a] <= c {
            best = best.min(v[a]);
        }
    }
    for a in 0..na {
        for b in 0..na {
            if cost[a] < c && c < cost[b] {
                let lambda = (c - cost[a]) / (cost[b] - cost[a]);
                best = best.min((1.0 - lambda) * v[a] + lambda * v[b]);
            }
        }
    }
    Ok(best)
}
