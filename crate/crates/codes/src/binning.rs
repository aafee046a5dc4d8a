//! Enumerable random codebooks with random binning and the Wyner-Ziv
//! in-bin decoder. Desk scale only: codebooks are stored explicitly.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CodeError, Result};

/// Largest codebook the explicit representation accepts.
pub const MAX_CODEBOOK_BITS: usize = 20;

/// `size` codewords of length `len` over an alphabet of `alphabet` symbols,
/// stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    len: usize,
    alphabet: usize,
    words: Vec<u16>,
}

impl Codebook {
    pub fn new(len: usize, alphabet: usize, words: Vec<Vec<usize>>) -> Result<Self> {
        if words.is_empty() || alphabet == 0 || alphabet > u16::MAX as usize {
            return Err(CodeError::InvalidParams("empty codebook or alphabet".into()));
        }
        let mut flat = Vec::with_capacity(words.len() * len);
        for w in &words {
            if w.len() != len || w.iter().any(|&s| s >= alphabet) {
                return Err(CodeError::InvalidParams("codeword length or symbol out of range".into()));
            }
            flat.extend(w.iter().map(|&s| s as u16));
        }
        Ok(Self {
            len,
            alphabet,
            words: flat,
        })
    }

    /// `2^bits` codewords with i.i.d. symbols drawn from `pmf`.
    pub fn random(bits: usize, len: usize, pmf: &[f64], seed: u64) -> Result<Self> {
        if bits > MAX_CODEBOOK_BITS {
            return Err(CodeError::CodebookTooLarge { bits });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cdf: Vec<f64> = pmf
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let words = (0..(1usize << bits) * len)
            .map(|_| {
                let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
                cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as u16
            })
            .collect();
        Ok(Self {
            len,
            alphabet: pmf.len(),
            words,
        })
    }

    pub fn size(&self) -> usize {
        self.words.len() / self.len.max(1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn word(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.words[index * self.len..(index + 1) * self.len]
            .iter()
            .map(|&s| s as usize)
    }

    /// Codeword maximizing `Σ_i score[x_i][c_i]` over the positions of
    /// `target` (padding excluded), ties to the lowest index.
    pub fn best_match(&self, target: &[usize], score: &[Vec<f64>]) -> usize {
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..self.size() {
            let word = &self.words[i * self.len..(i + 1) * self.len];
            let v: f64 = target
                .iter()
                .zip(word)
                .filter(|(&x, _)| x != crate::ldgm::PADDING)
                .map(|(&x, &c)| score[x][c as usize])
                .sum();
            if v > best.1 {
                best = (i, v);
            }
        }
        best.0
    }
}

/// Random binning: a seeded permutation of codeword indices, then modulo.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binning {
    num_bins: usize,
    bin_of: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Binning {
    pub fn new(codebook_size: usize, num_bins: usize, seed: u64) -> Result<Self> {
        if num_bins == 0 || num_bins > codebook_size {
            return Err(CodeError::InvalidParams(format!(
                "{num_bins} bins for {codebook_size} codewords"
            )));
        }
        let mut perm: Vec<usize> = (0..codebook_size).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let bin_of: Vec<usize> = perm.iter().map(|&p| bin_index(p, num_bins)).collect();
        let mut members = vec![Vec::new(); num_bins];
        for (i, &b) in bin_of.iter().enumerate() {
            members[b].push(i);
        }
        Ok(Self {
            num_bins,
            bin_of,
            members,
        })
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn bin_of(&self, codeword: usize) -> usize {
        self.bin_of[codeword]
    }

    /// Codeword indices in `bin`, increasing.
    pub fn members(&self, bin: usize) -> &[usize] {
        &self.members[bin]
    }
}

/// Bin of a (permuted) codeword index.
#[inline]
pub fn bin_index(codeword_index: usize, num_bins: usize) -> usize {
    codeword_index % num_bins
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WzDecision {
    pub codeword: usize,
    /// Another in-bin codeword scored exactly as high; the lowest index won.
    pub ambiguous: bool,
}

/// Log-likelihood table `ln P(c, y)` used by the in-bin decoder, laid out
/// `[c][y]`. Cells with equal values share a class so that scores only
/// depend on how many positions fall into each class.
#[derive(Clone, Debug, PartialEq)]
pub struct JointLogTable {
    num_y: usize,
    table: Vec<f64>,
    class_of: Vec<usize>,
    class_value: Vec<f64>,
}

impl JointLogTable {
    /// From joint probabilities `p[c][y]`; zero cells become `-inf`.
    pub fn from_joint(p: &[Vec<f64>]) -> Result<Self> {
        let num_y = p.first().map_or(0, Vec::len);
        if num_y == 0 || p.iter().any(|r| r.len() != num_y) {
            return Err(CodeError::InvalidParams("ragged joint table".into()));
        }
        let table: Vec<f64> = p.iter().flatten().map(|&v| v.ln()).collect();
        let mut class_value: Vec<f64> = Vec::new();
        let class_of = table
            .iter()
            .map(|&v| match class_value.iter().position(|&u| u == v) {
                Some(i) => i,
                None => {
                    class_value.push(v);
                    class_value.len() - 1
                }
            })
            .collect();
        Ok(Self {
            num_y,
            table,
            class_of,
            class_value,
        })
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize) -> f64 {
        self.table[c * self.num_y + y]
    }
}

/// In-bin codeword maximizing `Σ_i ln P(c_i, y_i)` over the positions of
/// `side` (which may be shorter than the codewords), ties to the lowest
/// index.
///
/// The score is accumulated from counts per likelihood value, so candidates
/// that are equally likely score bit-for-bit the same and ties are exact.
pub fn wz_decode(bin: usize, side: &[usize], codebook: &Codebook, binning: &Binning, joint: &JointLogTable) -> WzDecision {
    let num_y = joint.num_y;
    debug_assert_eq!(joint.table.len(), codebook.alphabet * num_y, "joint table does not match the codebook");
    let mut counts = vec![0u32; joint.class_value.len()];
    let mut best = f64::NEG_INFINITY;
    let mut choice = None;
    let mut ambiguous = false;
    for &i in binning.members(bin) {
        counts.iter_mut().for_each(|c| *c = 0);
        let word = &codebook.words[i * codebook.len..(i + 1) * codebook.len];
        for (&y, &c) in side.iter().zip(word) {
            counts[joint.class_of[c as usize * num_y + y]] += 1;
        }
        let v: f64 = counts
            .iter()
            .zip(&joint.class_value)
            .filter(|(&k, _)| k > 0)
            .map(|(&k, &l)| k as f64 * l)
            .sum();
        if choice.is_none() || v > best {
            best = v;
            choice = Some(i);
            ambiguous = false;
        } else if v == best {
            ambiguous = true;
        }
    }
    WzDecision {
        codeword: choice.expect("bins are never empty"),
        ambiguous,
    }
}
