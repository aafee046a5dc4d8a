use actionrd_core::solver::solve_for_target;
use actionrd_core::{ConditionalPmf, Pmf, RdcProblem, ScenarioInstance, SolverParams};
use log::debug;

use crate::binning::{Binning, Codebook, JointLogTable, MAX_CODEBOOK_BITS};
use crate::error::{CodeError, Result};
use crate::ldgm::{build_graph, select_mapping, DegreeProfile, LdgmGraph, MessagePassingParams, SymbolMapping};

/// Strategies (and actions) below this conditional mass are dropped from a
/// branch codebook.
const MASS_THRESHOLD: f64 = 1e-6;
/// Largest `I(T;Y|A=a)` for which a branch may skip binning.
const BINNING_GAP_TOL: f64 = 1e-6;

/// How the per-action source codes are realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SourceCodeKind {
    /// LDGM codes encoded by message passing; only valid when no branch
    /// needs binning.
    #[default]
    Ldgm,
    /// Explicit random codebooks with random binning (small `n` only).
    Codebook,
}

#[derive(Clone, Debug)]
pub struct DesignOptions {
    pub n: usize,
    /// Slack in the padded branch lengths `n_a = ⌈n(P_A(a) + ε)⌉`.
    pub epsilon: f64,
    pub source_code: SourceCodeKind,
    /// Codebook branches send bin indices; when `false` they send the full
    /// codeword index instead.
    pub binning: bool,
    pub profile: DegreeProfile,
    pub message_passing: MessagePassingParams,
    /// Largest `d` tried by the symbol-mapping search.
    pub d_max: usize,
    pub mapping_tol: f64,
    /// Seeds the graphs and codebooks.
    pub seed: u64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            n: 10_000,
            epsilon: 0.02,
            source_code: SourceCodeKind::Ldgm,
            binning: true,
            profile: DegreeProfile::default(),
            message_passing: MessagePassingParams::default(),
            d_max: 8,
            mapping_tol: 0.01,
            seed: 0,
        }
    }
}

/// An LDGM code over a symbol alphabet; `graph` is `None` when no bits are
/// sent and the codeword is the constant `fallback`.
#[derive(Clone, Debug)]
pub struct LdgmCode {
    pub mapping: SymbolMapping,
    pub graph: Option<LdgmGraph>,
    pub fallback: usize,
}

#[derive(Clone, Debug)]
pub enum BranchCode {
    /// One codeword, nothing sent.
    Constant(usize),
    Ldgm(LdgmCode),
    Codebook {
        codebook: Codebook,
        binning: Binning,
        /// `ln P(t|x, a)`, the encoder's matching score.
        encoder_score: Vec<Vec<f64>>,
    },
}

/// Source code used on the positions whose action is `a`.
#[derive(Clone, Debug)]
pub struct Branch {
    pub action: usize,
    /// Strategy indices (into the problem's space) in codeword-symbol order.
    pub strategies: Vec<usize>,
    /// `recon[t][y]` for each local strategy.
    pub recon: Vec<Vec<usize>>,
    /// `P_{T|X,A=a}` over local strategies.
    pub conditional: ConditionalPmf,
    pub marginal: Vec<f64>,
    /// `I(X;T|Y,A=a)`.
    pub rate: f64,
    /// `I(T;Y|A=a)`: what binning saves.
    pub binning_gap: f64,
    /// Bits sent for this branch: `⌈n P_A(a) I(X;T|Y,A=a)⌉`.
    pub k: usize,
    /// Padded length `⌈n (P_A(a) + ε)⌉`.
    pub padded_len: usize,
    /// `ln P(t, y | a)` for the Wyner-Ziv decoder.
    pub joint_log: JointLogTable,
    pub code: BranchCode,
}

/// Everything the encoder and decoder share: solved targets and code
/// parameters.
#[derive(Clone, Debug)]
pub struct Design {
    pub scenario: ScenarioInstance,
    pub n: usize,
    pub epsilon: f64,
    pub pa: Vec<f64>,
    /// `P_{A|X}`.
    pub pax: ConditionalPmf,
    /// `I(X;A)`.
    pub action_rate: f64,
    /// `⌈n I(X;A)⌉` action bits.
    pub k: usize,
    pub action_code: LdgmCode,
    pub branches: Vec<Branch>,
    pub message_passing: MessagePassingParams,
    pub source_code: SourceCodeKind,
    /// `(R, D, C)` of the solved test channel the design was built from.
    pub target: (f64, f64, f64),
}

fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..joint.first().map_or(0, Vec::len))
        .map(|j| joint.iter().map(|r| r[j]).sum())
        .collect();
    let mut total = 0.0;
    for (i, r) in joint.iter().enumerate() {
        for (j, &p) in r.iter().enumerate() {
            if p > 0.0 {
                total += p * (p / (rows[i] * cols[j])).log2();
            }
        }
    }
    total.max(0.0)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
        .0
}

fn derived_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn trial_seed(seed: u64, trial: u64, stream: u64) -> u64 {
    derived_seed(derived_seed(seed, trial + 1), stream + 1_000)
}

impl Design {
    /// Design from the test channel `ptx` (rows: source symbols, columns:
    /// strategies of `problem`).
    pub fn new(problem: &RdcProblem, ptx: &ConditionalPmf, options: &DesignOptions) -> Result<Self> {
        options.message_passing.validate()?;
        let sc = problem.scenario();
        let space = problem.space();
        let (nx, na, ny) = (sc.num_x(), sc.num_a(), sc.num_y());
        let n = options.n;
        if n < 100 {
            return Err(CodeError::InvalidParams(format!("n = {n} is below 100")));
        }
        if !(options.epsilon >= 0.0) {
            return Err(CodeError::InvalidParams("epsilon must be >= 0".into()));
        }
        if ptx.rows() != nx || ptx.cols() != space.len() {
            return Err(CodeError::InvalidParams("test channel does not match the strategy space".into()));
        }
        let px = sc.px().probs();
        let pxa: Vec<Vec<f64>> = (0..nx)
            .map(|x| (0..na).map(|a| space.class(a).map(|t| ptx.get(x, t)).sum()).collect())
            .collect();
        let pa: Vec<f64> = (0..na).map(|a| (0..nx).map(|x| px[x] * pxa[x][a]).sum()).collect();
        let joint_xa: Vec<Vec<f64>> = (0..nx).map(|x| (0..na).map(|a| px[x] * pxa[x][a]).collect()).collect();
        let action_rate = mutual_information(&joint_xa);
        let pax = ConditionalPmf::from_weights(nx, na, pxa.iter().flatten().copied().collect())?;
        let k = if na == 1 { 0 } else { (n as f64 * action_rate - 1e-9).ceil().max(0.0) as usize };

        let action_mapping = select_mapping(&Pmf::from_weights(&pa)?, options.d_max, options.mapping_tol)?;
        let action_graph = if k == 0 {
            None
        } else {
            Some(build_graph(k, n, &action_mapping, &options.profile, derived_seed(options.seed, 0))?)
        };
        let action_code = LdgmCode {
            mapping: action_mapping,
            graph: action_graph,
            fallback: argmax(&pa),
        };

        let mut branches = Vec::with_capacity(na);
        for a in 0..na {
            let padded_len = ((n as f64) * (pa[a] + options.epsilon)).ceil().min(n as f64) as usize;
            let class: Vec<usize> = space.class(a).collect();
            let class_mass: Vec<f64> = class
                .iter()
                .map(|&t| (0..nx).map(|x| px[x] * ptx.get(x, t)).sum::<f64>())
                .collect();
            let mut strategies: Vec<usize> = class
                .iter()
                .zip(&class_mass)
                .filter(|(_, &m)| pa[a] > MASS_THRESHOLD && m / pa[a] > MASS_THRESHOLD)
                .map(|(&t, _)| t)
                .collect();
            if strategies.is_empty() {
                // unused action: keep its single best strategy as a safe default
                let exp_dist = |t: usize| -> f64 {
                    let s = space.get(t);
                    (0..nx)
                        .map(|x| {
                            px[x]
                                * (0..ny)
                                    .map(|y| sc.channel().prob(x, a, y) * sc.distortion(x, s.apply(y)))
                                    .sum::<f64>()
                        })
                        .sum()
                };
                let best = class
                    .iter()
                    .copied()
                    .min_by(|&s, &t| exp_dist(s).total_cmp(&exp_dist(t)))
                    .ok_or_else(|| CodeError::InvalidParams(format!("action {a} has no strategies")))?;
                strategies.push(best);
            }
            let nt = strategies.len();
            let recon: Vec<Vec<usize>> = strategies.iter().map(|&t| space.get(t).recon().to_vec()).collect();
            let weights: Vec<f64> = strategies
                .iter()
                .map(|&t| (0..nx).map(|x| px[x] * ptx.get(x, t)).sum::<f64>())
                .collect();
            let total: f64 = weights.iter().sum();
            let marginal: Vec<f64> = if total > 0.0 {
                weights.iter().map(|w| w / total).collect()
            } else {
                vec![1.0 / nt as f64; nt]
            };
            let mut cond = Vec::with_capacity(nx * nt);
            for x in 0..nx {
                let row: Vec<f64> = strategies.iter().map(|&t| ptx.get(x, t)).collect();
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    cond.extend(row.iter().map(|v| v / s));
                } else {
                    cond.extend_from_slice(&marginal);
                }
            }
            let conditional = ConditionalPmf::from_weights(nx, nt, cond)?;
            // P(x, y, t | a)
            let px_a: Vec<f64> = if pa[a] > 0.0 {
                (0..nx).map(|x| px[x] * pxa[x][a] / pa[a]).collect()
            } else {
                px.to_vec()
            };
            let mut xyt = vec![0.0; nx * ny * nt];
            for x in 0..nx {
                for y in 0..ny {
                    let pxy = px_a[x] * sc.channel().prob(x, a, y);
                    for t in 0..nt {
                        xyt[(x * ny + y) * nt + t] = pxy * conditional.get(x, t);
                    }
                }
            }
            let ty: Vec<Vec<f64>> = (0..nt)
                .map(|t| (0..ny).map(|y| (0..nx).map(|x| xyt[(x * ny + y) * nt + t]).sum()).collect())
                .collect();
            let binning_gap = mutual_information(&ty);
            let xt: Vec<Vec<f64>> = (0..nx)
                .map(|x| (0..nt).map(|t| (0..ny).map(|y| xyt[(x * ny + y) * nt + t]).sum()).collect())
                .collect();
            let rate = (mutual_information(&xt) - binning_gap).max(0.0);
            let joint_log = JointLogTable::from_joint(&ty)?;
            let bits = |r: f64| (n as f64 * pa[a] * r - 1e-9).ceil().max(0.0) as usize;
            let mut k_a = if nt == 1 { 0 } else { bits(rate) };
            let fallback = argmax(&marginal);

            let code = if nt == 1 || (k_a == 0 && binning_gap <= BINNING_GAP_TOL) {
                BranchCode::Constant(fallback)
            } else {
                match options.source_code {
                    SourceCodeKind::Ldgm => {
                        if binning_gap > BINNING_GAP_TOL {
                            return Err(CodeError::BinningRequired { action: a, gap: binning_gap });
                        }
                        let mapping = select_mapping(&Pmf::from_weights(&marginal)?, options.d_max, options.mapping_tol)?;
                        let graph = build_graph(k_a, padded_len, &mapping, &options.profile, derived_seed(options.seed, 1 + a as u64))?;
                        BranchCode::Ldgm(LdgmCode {
                            mapping,
                            graph: Some(graph),
                            fallback,
                        })
                    }
                    SourceCodeKind::Codebook => {
                        let book_bits = bits(rate + binning_gap).max(k_a);
                        if book_bits > MAX_CODEBOOK_BITS {
                            return Err(CodeError::CodebookTooLarge { bits: book_bits });
                        }
                        let seed = derived_seed(options.seed, 1 + a as u64);
                        let codebook = Codebook::random(book_bits, padded_len, &marginal, seed)?;
                        if !options.binning {
                            k_a = book_bits;
                        }
                        let binning = Binning::new(1 << book_bits, 1 << k_a, derived_seed(seed, 7))?;
                        let encoder_score = (0..nx)
                            .map(|x| (0..nt).map(|t| conditional.get(x, t).ln()).collect())
                            .collect();
                        BranchCode::Codebook {
                            codebook,
                            binning,
                            encoder_score,
                        }
                    }
                }
            };
            debug!("branch {a}: {nt} strategies, rate {rate:.4}, gap {binning_gap:.4}, {k_a} bits over {padded_len}");
            branches.push(Branch {
                action: a,
                strategies,
                recon,
                conditional,
                marginal,
                rate,
                binning_gap,
                k: k_a,
                padded_len,
                joint_log,
                code,
            });
        }
        let distortion = problem.distortion_of(ptx);
        let cost = problem.cost_of(ptx);
        let target_rate = action_rate + (0..na).map(|a| pa[a] * branches[a].rate).sum::<f64>();
        Ok(Self {
            scenario: sc.clone(),
            n,
            epsilon: options.epsilon,
            pa,
            pax,
            action_rate,
            k,
            action_code,
            branches,
            message_passing: options.message_passing.clone(),
            source_code: options.source_code,
            target: (target_rate, distortion, cost),
        })
    }

    /// Solves for the test channel at `(d, c)` first, then designs for it.
    pub fn for_target(problem: &RdcProblem, d: f64, c: f64, solver: &SolverParams, options: &DesignOptions) -> Result<Self> {
        let found = solve_for_target(problem, d, c, solver)?;
        let trace = problem.solve_traced(found.point.s, found.point.m, solver)?;
        Self::new(problem, &trace.ptx, options)
    }

    /// `(k + Σ_a k_a) / n`.
    pub fn rate(&self) -> f64 {
        (self.k + self.branches.iter().map(|b| b.k).sum::<usize>()) as f64 / self.n as f64
    }
}
