use actionrd_core::Pmf;

use crate::error::{CodeError, Result};

/// Maps `d`-bit check patterns onto a non-binary alphabet. Pattern `p` is
/// read with `g_1` as the most significant bit; the first `nu[0]` patterns
/// map to symbol 0, the next `nu[1]` to symbol 1, and so on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolMapping {
    d: usize,
    nu: Vec<usize>,
    phi: Vec<usize>,
}

impl SymbolMapping {
    pub fn new(d: usize, nu: Vec<usize>) -> Result<Self> {
        if d > 16 {
            return Err(CodeError::InvalidParams(format!("d = {d} is too large")));
        }
        if nu.iter().sum::<usize>() != 1 << d {
            return Err(CodeError::InvalidParams(format!("counts {nu:?} do not sum to 2^{d}")));
        }
        let phi = nu
            .iter()
            .enumerate()
            .flat_map(|(a, &c)| std::iter::repeat(a).take(c))
            .collect();
        Ok(Self { d, nu, phi })
    }

    /// Trivial mapping for a one-symbol alphabet: no check bits at all.
    pub fn constant() -> Self {
        Self {
            d: 0,
            nu: vec![1],
            phi: vec![0],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nu(&self) -> &[usize] {
        &self.nu
    }

    pub fn num_symbols(&self) -> usize {
        self.nu.len()
    }

    pub fn num_patterns(&self) -> usize {
        self.phi.len()
    }

    #[inline]
    pub fn phi(&self, pattern: usize) -> usize {
        self.phi[pattern]
    }

    /// `ν_a / 2^d` for every symbol.
    pub fn implied_pmf(&self) -> Vec<f64> {
        let total = self.phi.len() as f64;
        self.nu.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn max_error(&self, pa: &[f64]) -> f64 {
        self.implied_pmf()
            .iter()
            .zip(pa)
            .map(|(q, p)| (q - p).abs())
            .fold(0.0, f64::max)
    }
}

/// Rounds `pa · 2^d` to integer counts summing to `2^d` (largest remainder).
fn round_counts(pa: &[f64], d: usize) -> Vec<usize> {
    let total = 1usize << d;
    let scaled: Vec<f64> = pa.iter().map(|p| p * total as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|v| v.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..pa.len()).collect();
    // stable: ties go to the lower index
    order.sort_by(|&i, &j| (scaled[j] - scaled[j].floor()).total_cmp(&(scaled[i] - scaled[i].floor())));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Smallest `d ≤ d_max` whose rounded counts approximate `pa` within `tol`
/// in every coordinate.
pub fn select_mapping(pa: &Pmf, d_max: usize, tol: f64) -> Result<SymbolMapping> {
    let probs = pa.probs();
    if probs.len() == 1 {
        return Ok(SymbolMapping::constant());
    }
    let mut best = f64::INFINITY;
    for d in 1..=d_max.min(16) {
        if (1usize << d) < probs.iter().filter(|&&p| p > 0.0).count() {
            continue;
        }
        let mapping = SymbolMapping::new(d, round_counts(probs, d))?;
        let err = mapping.max_error(probs);
        if err <= tol {
            return Ok(mapping);
        }
        best = best.min(err);
    }
    Err(CodeError::ToleranceUnachievable { d_max, tol, best })
}
