//! Exhaustive Wyner-Ziv decoding reference over a binary symmetric side
//! channel: codewords are `n`-bit words packed into `u32`.

/// Minimum-Hamming-distance member of `members` (ties to the lowest codeword
/// index) and whether the minimum was tied.
pub fn nearest(codebook: &[u32], members: &[usize], y: u32) -> (usize, bool) {
    let mut best = (u32::MAX, usize::MAX);
    let mut tied = false;
    for &i in members {
        let d = (codebook[i] ^ y).count_ones();
        if d < best.0 || (d == best.0 && i < best.1) {
            tied = d == best.0;
            best = (d, i);
        } else if d == best.0 {
            tied = true;
        }
    }
    (best.1, tied)
}

/// Error statistics of maximum-likelihood in-bin decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct WzStats {
    /// `P(decoded ≠ sent)` for a uniformly chosen codeword.
    pub error_probability: f64,
    /// Number of `(bin, y)` pairs whose decision was a tie.
    pub ties: usize,
    /// `decisions[bin * 2^n + y]`
    pub decisions: Vec<usize>,
}

/// Enumerates every bin and every `y ∈ {0,1}^n`. `bin_of[i]` is the bin of
/// codeword `i`; side information is the sent codeword through a BSC(`p`).
pub fn exhaustive_bsc(codebook: &[u32], bin_of: &[usize], num_bins: usize, n: u32, p: f64) -> WzStats {
    let mut members = vec![Vec::new(); num_bins];
    for (i, &b) in bin_of.iter().enumerate() {
        members[b].push(i);
    }
    let words = 1usize << n;
    let mut decisions = vec![0; num_bins * words];
    let mut ties = 0;
    let mut error = 0.0;
    let flip_weight: Vec<f64> = (0..=n).map(|k| p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)).collect();
    for (b, list) in members.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        for y in 0..words as u32 {
            let (dec, tie) = nearest(codebook, list, y);
            decisions[b * words + y as usize] = dec;
            ties += tie as usize;
            for &c in list {
                if c != dec {
                    error += flip_weight[(codebook[c] ^ y).count_ones() as usize];
                }
            }
        }
    }
    WzStats {
        error_probability: error / codebook.len() as f64,
        ties,
        decisions,
    }
}
