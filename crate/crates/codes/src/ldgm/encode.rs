use actionrd_core::ConditionalPmf;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{symbols_from_checks, LdgmGraph};
use super::mapping::SymbolMapping;
use crate::error::{CodeError, Result};

/// Saturation level for log-likelihood ratios; frozen bits send this.
const LLR_CAP: f64 = 40.0;
/// Keeps `atanh` finite when a product of `tanh` terms rounds to ±1.
const TANH_CAP: f64 = 1.0 - 1e-15;

/// Marks a padding position in the target sequence.
pub const PADDING: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct MessagePassingParams {
    pub max_iters: usize,
    /// Iteration (0-based) from which check-to-bit messages are damped.
    pub damping_start: usize,
    /// Weight of the previous message once damping is on:
    /// `m ← damping · m_old + (1 − damping) · m_new`.
    pub damping: f64,
    /// Undecided bits whose belief exceeds this in magnitude are frozen.
    pub decimation_llr_threshold: f64,
    /// Lower bound applied to the target conditional before it becomes a
    /// factor, so that no pattern is ruled out completely.
    pub factor_floor: f64,
    pub seed: u64,
}

impl Default for MessagePassingParams {
    fn default() -> Self {
        Self {
            max_iters: 100,
            damping_start: 30,
            damping: 0.8,
            decimation_llr_threshold: 2.0,
            factor_floor: 1e-3,
            seed: 0,
        }
    }
}

impl MessagePassingParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.damping_start >= self.max_iters {
            return Err(CodeError::InvalidParams(format!(
                "need 0 <= damping_start < max_iters (got {} and {})",
                self.damping_start, self.max_iters
            )));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(CodeError::InvalidParams(format!("damping {} not in [0,1)", self.damping)));
        }
        if !(self.decimation_llr_threshold >= 0.0) || !(self.factor_floor > 0.0 && self.factor_floor < 1.0) {
            return Err(CodeError::InvalidParams("threshold must be >= 0 and floor in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EncodeOutcome {
    pub bits: Vec<u8>,
    pub codeword: Vec<usize>,
    pub iterations: usize,
    /// Frozen-bit count after each iteration.
    pub frozen_history: Vec<usize>,
    /// Share of bits set by rounding at the iteration cap.
    pub forced_fraction: f64,
}

/// Pattern weights `w_l(p) ∝ P(φ(p) | x_l) / ν_{φ(p)}` for every source
/// symbol; padding gets no factor.
fn pattern_weights(joint: &ConditionalPmf, mapping: &SymbolMapping, floor: f64) -> Vec<Vec<f64>> {
    let nu = mapping.nu();
    (0..joint.rows())
        .map(|x| {
            (0..mapping.num_patterns())
                .map(|p| {
                    let a = mapping.phi(p);
                    joint.get(x, a).max(floor) / nu[a] as f64
                })
                .collect()
        })
        .collect()
}

#[inline]
fn bit_prob(llr: f64, value: usize) -> f64 {
    let p0 = 1.0 / (1.0 + (-llr).exp());
    if value == 0 {
        p0
    } else {
        1.0 - p0
    }
}

/// Sum-product with decimation on the LDGM graph, looking for a codeword
/// whose symbols are jointly typical with `target` under `joint`
/// (rows: target symbols, columns: codeword symbols).
pub fn encode_sum_product(
    target: &[usize],
    joint: &ConditionalPmf,
    graph: &LdgmGraph,
    mapping: &SymbolMapping,
    params: &MessagePassingParams,
) -> Result<EncodeOutcome> {
    params.validate()?;
    let (k, n, d) = (graph.k(), graph.n(), mapping.d());
    if target.len() != n || graph.d() != d {
        return Err(CodeError::InvalidParams(format!(
            "target of length {} for a graph with n = {n}, d = {}",
            target.len(),
            graph.d()
        )));
    }
    if joint.cols() != mapping.num_symbols() {
        return Err(CodeError::InvalidParams("target conditional does not match the symbol mapping".into()));
    }
    if let Some(&x) = target.iter().find(|&&x| x != PADDING && x >= joint.rows()) {
        return Err(CodeError::InvalidParams(format!("target symbol {x} outside the conditional")));
    }
    let weights = pattern_weights(joint, mapping, params.factor_floor);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let num_checks = graph.num_checks();
    let num_patterns = mapping.num_patterns();

    let edges = graph.num_edges();
    let mut bit_to_check = vec![0.0f64; edges];
    let mut check_to_bit = vec![0.0f64; edges];
    let mut tanh_in = vec![0.0f64; edges];
    let mut from_bits = vec![0.0f64; num_checks];
    let mut from_symbol = vec![0.0f64; num_checks];
    let mut frozen: Vec<Option<u8>> = vec![None; k];
    let mut num_frozen = 0usize;
    let mut history = Vec::new();
    let mut belief = vec![0.0f64; k];
    let mut prefix = Vec::new();
    let mut probs = vec![0.0f64; d];
    let mut iterations = 0;

    for iter in 0..params.max_iters {
        iterations = iter + 1;
        // bits -> checks
        for b in 0..k {
            let ids = graph.bit_edge_ids(b);
            match frozen[b] {
                Some(v) => {
                    let llr = if v == 0 { LLR_CAP } else { -LLR_CAP };
                    for &e in ids {
                        bit_to_check[e as usize] = llr;
                    }
                }
                None => {
                    let total: f64 = ids.iter().map(|&e| check_to_bit[e as usize]).sum();
                    for &e in ids {
                        bit_to_check[e as usize] = (total - check_to_bit[e as usize]).clamp(-LLR_CAP, LLR_CAP);
                    }
                }
            }
        }
        // checks -> symbol factors
        for c in 0..num_checks {
            let mut prod = 1.0;
            for e in graph.check_edges(c) {
                let t = (0.5 * bit_to_check[e]).tanh();
                tanh_in[e] = t;
                prod *= t;
            }
            from_bits[c] = 2.0 * prod.clamp(-TANH_CAP, TANH_CAP).atanh();
        }
        // symbol factors -> checks
        for l in 0..n {
            let base = l * d;
            if target[l] == PADDING {
                from_symbol[base..base + d].fill(0.0);
                continue;
            }
            let w = &weights[target[l]];
            for kappa in 0..d {
                probs[kappa] = bit_prob(from_bits[base + kappa], 0);
            }
            for kappa in 0..d {
                let mut mass = [0.0f64; 2];
                for (p, &wp) in w.iter().enumerate().take(num_patterns) {
                    let mut v = wp;
                    for other in 0..d {
                        if other == kappa {
                            continue;
                        }
                        let bit = (p >> (d - 1 - other)) & 1;
                        v *= if bit == 0 { probs[other] } else { 1.0 - probs[other] };
                    }
                    mass[(p >> (d - 1 - kappa)) & 1] += v;
                }
                from_symbol[base + kappa] = (mass[0].max(1e-300).ln() - mass[1].max(1e-300).ln()).clamp(-LLR_CAP, LLR_CAP);
            }
        }
        // checks -> bits, with prefix/suffix products of the incoming tanh terms
        let damp = if iter >= params.damping_start { params.damping } else { 0.0 };
        for c in 0..num_checks {
            let range = graph.check_edges(c);
            let lead = (0.5 * from_symbol[c]).tanh();
            prefix.clear();
            let mut acc = lead;
            for e in range.clone() {
                prefix.push(acc);
                acc *= tanh_in[e];
            }
            let mut suffix = 1.0;
            for (i, e) in range.clone().enumerate().rev() {
                let t = (prefix[i] * suffix).clamp(-TANH_CAP, TANH_CAP);
                let fresh = (2.0 * t.atanh()).clamp(-LLR_CAP, LLR_CAP);
                check_to_bit[e] = damp * check_to_bit[e] + (1.0 - damp) * fresh;
                suffix *= tanh_in[e];
            }
        }
        // beliefs and decimation
        let mut strongest: Option<(usize, f64)> = None;
        let mut any = false;
        for b in 0..k {
            belief[b] = graph.bit_edge_ids(b).iter().map(|&e| check_to_bit[e as usize]).sum();
            if frozen[b].is_some() {
                continue;
            }
            let mag = belief[b].abs();
            if mag > params.decimation_llr_threshold {
                frozen[b] = Some(u8::from(belief[b] < 0.0));
                num_frozen += 1;
                any = true;
            } else if strongest.map_or(true, |(_, m)| mag > m) {
                strongest = Some((b, mag));
            }
        }
        if !any {
            if let Some((b, mag)) = strongest {
                // stall: freeze the most confident bit, or a random one if
                // every belief is exactly zero
                let b = if mag > 0.0 {
                    b
                } else {
                    let undecided: Vec<usize> = (0..k).filter(|&i| frozen[i].is_none()).collect();
                    undecided[rng.gen_range(0..undecided.len())]
                };
                frozen[b] = Some(sign_bit(belief[b], &mut rng));
                num_frozen += 1;
            }
        }
        history.push(num_frozen);
        if num_frozen == k {
            break;
        }
    }

    let forced = k - num_frozen;
    let bits: Vec<u8> = (0..k)
        .map(|b| frozen[b].unwrap_or_else(|| sign_bit(belief[b], &mut rng)))
        .collect();
    let codeword = symbols_from_checks(&graph.checks(&bits), n, mapping);
    Ok(EncodeOutcome {
        bits,
        codeword,
        iterations,
        frozen_history: history,
        forced_fraction: if k == 0 { 0.0 } else { forced as f64 / k as f64 },
    })
}

fn sign_bit(llr: f64, rng: &mut impl Rng) -> u8 {
    if llr > 0.0 {
        0
    } else if llr < 0.0 {
        1
    } else {
        rng.gen_range(0..2)
    }
}
