//! Shannon strategies: a reconstruction map `y -> x̂` bundled with an action.

use std::ops::Range;

use log::warn;

use crate::error::{Error, Result};
use crate::prob::{ConditionalPmf, Pmf, ZERO_TOL};
use crate::scenario::ScenarioInstance;

pub const DEFAULT_STRATEGY_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShannonStrategy {
    recon: Vec<usize>,
    action: usize,
}

impl ShannonStrategy {
    pub fn new(recon: Vec<usize>, action: usize) -> Self {
        Self { recon, action }
    }

    /// Reconstruction chosen when the side information is `y`.
    #[inline]
    pub fn apply(&self, y: usize) -> usize {
        self.recon[y]
    }

    #[inline]
    pub fn action(&self) -> usize {
        self.action
    }

    pub fn recon(&self) -> &[usize] {
        &self.recon
    }
}

/// Optional quotienting of the strategy space.
///
/// Both reductions leave `R(D,C)` unchanged: `SupportEquivalent` merges
/// strategies that differ only at side-information symbols the action can
/// never produce, and `DeterministicImplication` additionally fixes `t(y)` to
/// the zero-distortion reconstruction whenever `y` pins down `x` under the
/// strategy's action.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pruning {
    #[default]
    None,
    SupportEquivalent,
    DeterministicImplication,
}

/// Ordered list of strategies, grouped contiguously by action.
#[derive(Clone, Debug)]
pub struct StrategySpace {
    strategies: Vec<ShannonStrategy>,
    classes: Vec<Range<usize>>,
    num_xhat: usize,
    num_y: usize,
}

impl StrategySpace {
    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    pub fn get(&self, t: usize) -> &ShannonStrategy {
        &self.strategies[t]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ShannonStrategy> {
        self.strategies.iter()
    }

    #[inline]
    pub fn action_of(&self, t: usize) -> usize {
        self.strategies[t].action
    }

    /// Index range of the class `T^a`.
    pub fn class(&self, a: usize) -> Range<usize> {
        self.classes[a].clone()
    }

    pub fn num_actions(&self) -> usize {
        self.classes.len()
    }

    pub fn num_xhat(&self) -> usize {
        self.num_xhat
    }

    pub fn num_y(&self) -> usize {
        self.num_y
    }

    pub fn position(&self, strategy: &ShannonStrategy) -> Option<usize> {
        self.class(strategy.action)
            .find(|&t| self.strategies[t] == *strategy)
    }

    /// A hand-picked strategy set, regrouped by action (order within each
    /// class is kept).
    pub fn from_strategies(
        mut strategies: Vec<ShannonStrategy>,
        num_actions: usize,
        num_xhat: usize,
        num_y: usize,
    ) -> Result<Self> {
        for t in &strategies {
            if t.action >= num_actions || t.recon.len() != num_y || t.recon.iter().any(|&x| x >= num_xhat) {
                return Err(Error::ShapeMismatch(format!("strategy {t:?} outside the alphabets")));
            }
        }
        strategies.sort_by_key(|t| t.action);
        if strategies.iter().enumerate().any(|(i, t)| strategies[..i].contains(t)) {
            return Err(Error::InvalidScenario("duplicate strategies".into()));
        }
        let classes = (0..num_actions)
            .map(|a| {
                let start = strategies.partition_point(|t| t.action < a);
                let end = strategies.partition_point(|t| t.action <= a);
                start..end
            })
            .collect();
        Ok(Self {
            strategies,
            classes,
            num_xhat,
            num_y,
        })
    }

    /// Strategy space for a scenario, with optional pruning.
    pub fn for_scenario(scenario: &ScenarioInstance, pruning: Pruning, cap: usize) -> Result<Self> {
        let (nx, ny, na, nxh) = (
            scenario.num_x(),
            scenario.num_y(),
            scenario.num_a(),
            scenario.num_xhat(),
        );
        // fixed[a][y] = Some(x̂) when t(y) is pinned for action a
        let fixed: Vec<Vec<Option<usize>>> = (0..na)
            .map(|a| {
                (0..ny)
                    .map(|y| {
                        if pruning == Pruning::None {
                            return None;
                        }
                        let support: Vec<usize> = (0..nx)
                            .filter(|&x| scenario.channel().prob(x, a, y) > ZERO_TOL)
                            .collect();
                        match support.as_slice() {
                            [] => Some(0),
                            [x] if pruning == Pruning::DeterministicImplication => {
                                Some(scenario.best_recon(*x))
                            }
                            _ => None,
                        }
                    })
                    .collect()
            })
            .collect();
        build_space(nxh, ny, &fixed, cap)
    }
}

/// All `|X̂|^|Y| · |A|` strategies, action-major, then lexicographic in the
/// reconstruction vector with `y = 0` most significant.
pub fn enumerate_strategies(num_xhat: usize, num_y: usize, num_a: usize) -> Result<StrategySpace> {
    enumerate_with_cap(num_xhat, num_y, num_a, DEFAULT_STRATEGY_CAP)
}

pub fn enumerate_with_cap(num_xhat: usize, num_y: usize, num_a: usize, cap: usize) -> Result<StrategySpace> {
    if num_xhat == 0 || num_y == 0 || num_a == 0 {
        return Err(Error::InvalidScenario("alphabets must be non-empty".into()));
    }
    build_space(num_xhat, num_y, &vec![vec![None; num_y]; num_a], cap)
}

fn build_space(num_xhat: usize, num_y: usize, fixed: &[Vec<Option<usize>>], cap: usize) -> Result<StrategySpace> {
    let count: u128 = fixed
        .iter()
        .map(|row| {
            let free = row.iter().filter(|f| f.is_none()).count() as u32;
            (num_xhat as u128).checked_pow(free).unwrap_or(u128::MAX)
        })
        .fold(0u128, |acc, c| acc.saturating_add(c));
    if count > cap as u128 {
        return Err(Error::SizeLimitExceeded { count, cap });
    }
    let mut strategies = Vec::with_capacity(count as usize);
    let mut classes = Vec::with_capacity(fixed.len());
    for (a, row) in fixed.iter().enumerate() {
        let start = strategies.len();
        let free: Vec<usize> = (0..num_y).filter(|&y| row[y].is_none()).collect();
        let mut digits = vec![0usize; free.len()];
        loop {
            let mut recon: Vec<usize> = row.iter().map(|f| f.unwrap_or(0)).collect();
            for (&y, &d) in free.iter().zip(&digits) {
                recon[y] = d;
            }
            strategies.push(ShannonStrategy { recon, action: a });
            // odometer with the last free position least significant
            let mut pos = digits.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < num_xhat {
                    break;
                }
                digits[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX || digits.is_empty() {
                break;
            }
        }
        classes.push(start..strategies.len());
    }
    Ok(StrategySpace {
        strategies,
        classes,
        num_xhat,
        num_y,
    })
}

/// Number of strategies carrying marginal mass above `threshold`, compared
/// against the cardinality bound `|X||A| + 2`. Exceeding the bound is only
/// logged: it constrains some optimal support, not every near-optimal one.
pub fn support_report(px: &Pmf, ptx: &ConditionalPmf, num_a: usize, threshold: f64) -> (usize, usize) {
    let nx = px.len();
    let used = (0..ptx.cols())
        .filter(|&t| (0..nx).map(|x| px[x] * ptx.get(x, t)).sum::<f64>() > threshold)
        .count();
    let bound = nx * num_a + 2;
    if used > bound {
        warn!("strategy support {used} exceeds the cardinality bound {bound}");
    }
    (used, bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(enumerate_strategies(2, 1, 2).unwrap().len(), 4);
        assert_eq!(enumerate_strategies(2, 2, 2).unwrap().len(), 8);
        assert_eq!(enumerate_strategies(5, 6, 2).unwrap().len(), 31_250);
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_with_cap(5, 6, 2, 1000).unwrap_err();
        assert!(matches!(err, Error::SizeLimitExceeded { count: 31_250, cap: 1000 }));
        assert!(enumerate_strategies(10, 7, 1).is_err());
    }

    #[test]
    fn lexicographic_order_and_lookup() {
        let space = enumerate_strategies(2, 2, 2).unwrap();
        let recons: Vec<_> = space.iter().map(|t| (t.action(), t.recon().to_vec())).collect();
        assert_eq!(recons[0], (0, vec![0, 0]));
        assert_eq!(recons[1], (0, vec![0, 1]));
        assert_eq!(recons[2], (0, vec![1, 0]));
        assert_eq!(recons[4], (1, vec![0, 0]));
        let t = space.get(2);
        assert_eq!(t.apply(0), 1);
        assert_eq!(t.apply(1), 0);
    }

    #[test]
    fn classes_partition_the_space() {
        let space = enumerate_strategies(3, 2, 3).unwrap();
        let total: usize = (0..3).map(|a| space.class(a).len()).sum();
        assert_eq!(total, space.len());
        for a in 0..3 {
            assert!(space.class(a).all(|t| space.action_of(t) == a));
        }
        let mut uniq: Vec<_> = space.iter().cloned().collect();
        uniq.sort_by(|x, y| (x.action, &x.recon).cmp(&(y.action, &y.recon)));
        uniq.dedup();
        assert_eq!(uniq.len(), space.len());
    }

    #[test]
    fn enumeration_is_stable() {
        let a = enumerate_strategies(3, 3, 2).unwrap();
        let b = enumerate_strategies(3, 3, 2).unwrap();
        assert!(a.iter().zip(b.iter()).all(|(s, t)| s == t));
    }

    #[test]
    fn single_symbol_alphabets() {
        let space = enumerate_strategies(1, 1, 1).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space.get(0).recon(), &[0]);
    }
}
