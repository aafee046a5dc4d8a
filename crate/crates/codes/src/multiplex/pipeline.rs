use actionrd_core::ActionChannel;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::design::{trial_seed, Branch, BranchCode, Design, LdgmCode};
use crate::binning::wz_decode;
use crate::error::{CodeError, Result};
use crate::ldgm::{encode_sum_product, forward_map, MessagePassingParams, PADDING};

/// Side-information channel `P_{Y|X,A}`, sampled independently per position.
#[derive(Clone, Debug)]
pub struct SideInfoOracle {
    channel: ActionChannel,
    seed: u64,
}

impl SideInfoOracle {
    pub fn new(channel: ActionChannel, seed: u64) -> Self {
        Self { channel, seed }
    }

    /// `Y_i ~ P(·|x_i, a_i)`; deterministic in the seed.
    pub fn observe(&self, source: &[usize], actions: &[usize]) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        source
            .iter()
            .zip(actions)
            .map(|(&x, &a)| sample(self.channel.row(x, a), &mut rng))
            .collect()
    }
}

pub(crate) fn sample(pmf: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the last cumulative value
    pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// What a branch sends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchPayload {
    Nothing,
    Bits(Vec<u8>),
    Bin(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub action_bits: Vec<u8>,
    pub branches: Vec<BranchPayload>,
}

/// Encoder-side quantities kept for evaluation only.
#[derive(Clone, Debug)]
pub struct EncoderState {
    pub actions: Vec<usize>,
    /// Local strategy chosen for every position.
    pub strategies: Vec<usize>,
    /// Codeword index sent in each codebook branch.
    pub codewords: Vec<Option<usize>>,
    pub forced_fraction: f64,
}

/// Positions carrying action `a`, in order.
pub fn demux(actions: &[usize], a: usize) -> Vec<usize> {
    actions
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == a)
        .map(|(i, _)| i)
        .collect()
}

fn run_ldgm(
    code: &LdgmCode,
    target: &[usize],
    len: usize,
    joint: &actionrd_core::ConditionalPmf,
    params: &MessagePassingParams,
) -> Result<(Vec<u8>, Vec<usize>, f64)> {
    match &code.graph {
        None => Ok((Vec::new(), vec![code.fallback; len], 0.0)),
        Some(graph) => {
            let out = encode_sum_product(target, joint, graph, &code.mapping, params)?;
            Ok((out.bits, out.codeword, out.forced_fraction))
        }
    }
}

fn replay_ldgm(code: &LdgmCode, bits: &[u8], len: usize) -> Vec<usize> {
    match &code.graph {
        None => vec![code.fallback; len],
        Some(graph) => forward_map(bits, graph, &code.mapping),
    }
}

/// Encoder: action code, demultiplexing, padding, per-action source codes.
pub fn encode(source: &[usize], design: &Design, seed: u64) -> Result<(Message, EncoderState)> {
    let n = design.n;
    if source.len() != n {
        return Err(CodeError::InvalidParams(format!("source of length {} for n = {n}", source.len())));
    }
    let mut params = design.message_passing.clone();
    params.seed = trial_seed(seed, 0, 1);
    let (action_bits, actions, mut forced) = run_ldgm(&design.action_code, source, n, &design.pax, &params)?;
    let mut strategies = vec![0usize; n];
    let mut codewords = vec![None; design.branches.len()];
    let mut payloads = Vec::with_capacity(design.branches.len());
    for branch in &design.branches {
        let a = branch.action;
        let positions = demux(&actions, a);
        if positions.len() > branch.padded_len {
            return Err(CodeError::PaddingOverflow {
                action: a,
                count: positions.len(),
                capacity: branch.padded_len,
            });
        }
        let mut target: Vec<usize> = positions.iter().map(|&i| source[i]).collect();
        target.resize(branch.padded_len, PADDING);
        let (payload, word) = match &branch.code {
            BranchCode::Constant(t) => (BranchPayload::Nothing, vec![*t; branch.padded_len]),
            BranchCode::Ldgm(code) => {
                params.seed = trial_seed(seed, 0, 2 + a as u64);
                let (bits, word, f) = run_ldgm(code, &target, branch.padded_len, &branch.conditional, &params)?;
                forced = forced.max(f);
                (BranchPayload::Bits(bits), word)
            }
            BranchCode::Codebook {
                codebook,
                binning,
                encoder_score,
            } => {
                let index = codebook.best_match(&target, encoder_score);
                codewords[a] = Some(index);
                (BranchPayload::Bin(binning.bin_of(index)), codebook.word(index).collect())
            }
        };
        for (j, &i) in positions.iter().enumerate() {
            strategies[i] = word[j];
        }
        payloads.push(payload);
    }
    Ok((
        Message {
            action_bits,
            branches: payloads,
        },
        EncoderState {
            actions,
            strategies,
            codewords,
            forced_fraction: forced,
        },
    ))
}

#[derive(Clone, Debug)]
pub struct Decoded {
    pub estimate: Vec<usize>,
    pub actions: Vec<usize>,
    /// Codeword index chosen in each codebook branch.
    pub codewords: Vec<Option<usize>>,
    pub ambiguities: usize,
}

/// Actions the decoder derives from the message.
pub fn decode_actions(message: &Message, design: &Design) -> Vec<usize> {
    replay_ldgm(&design.action_code, &message.action_bits, design.n)
}

/// Decoder: given the side information acquired under
/// [`decode_actions`], runs the per-action decoders and multiplexes the
/// estimates `x̂_i = t_i(y_i)` back.
pub fn decode(message: &Message, side: &[usize], design: &Design) -> Result<Decoded> {
    let n = design.n;
    if side.len() != n || message.branches.len() != design.branches.len() {
        return Err(CodeError::InvalidParams("message or side information does not match the design".into()));
    }
    let actions = decode_actions(message, design);
    let mut estimate = vec![0usize; n];
    let mut codewords = vec![None; design.branches.len()];
    let mut ambiguities = 0;
    for (branch, payload) in design.branches.iter().zip(&message.branches) {
        let a = branch.action;
        let positions = demux(&actions, a);
        if positions.len() > branch.padded_len {
            return Err(CodeError::PaddingOverflow {
                action: a,
                count: positions.len(),
                capacity: branch.padded_len,
            });
        }
        let y: Vec<usize> = positions.iter().map(|&i| side[i]).collect();
        let word: Vec<usize> = match (&branch.code, payload) {
            (BranchCode::Constant(t), _) => vec![*t; positions.len()],
            (BranchCode::Ldgm(code), BranchPayload::Bits(bits)) => replay_ldgm(code, bits, branch.padded_len),
            (
                BranchCode::Codebook {
                    codebook, binning, ..
                },
                BranchPayload::Bin(bin),
            ) => {
                let decision = wz_decode(*bin, &y, codebook, binning, &branch.joint_log);
                ambiguities += usize::from(decision.ambiguous);
                codewords[a] = Some(decision.codeword);
                codebook.word(decision.codeword).collect()
            }
            _ => return Err(CodeError::InvalidParams(format!("payload for branch {a} does not match its code"))),
        };
        for (j, &i) in positions.iter().enumerate() {
            estimate[i] = reconstruct(branch, word[j], y[j]);
        }
    }
    Ok(Decoded {
        estimate,
        actions,
        codewords,
        ambiguities,
    })
}

/// Final estimate: the strategy's reconstruction at the observed `y`.
#[inline]
pub fn reconstruct(branch: &Branch, strategy: usize, y: usize) -> usize {
    branch.recon[strategy][y]
}

/// Draws `n` i.i.d. source symbols.
pub fn sample_source(design: &Design, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = design.scenario.px().probs();
    (0..design.n).map(|_| sample(px, &mut rng)).collect()
}
