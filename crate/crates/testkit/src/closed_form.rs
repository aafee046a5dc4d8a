//! Closed-form rate-distortion curves and a small exhaustive search.

use crate::info::{entropy, h2};

/// `R(D) = 1 − h2(D)` for a uniform bit under Hamming distortion.
pub fn binary_rd(d: f64) -> f64 {
    if d >= 0.5 {
        0.0
    } else {
        1.0 - h2(d.max(0.0))
    }
}

/// `R(D) = log2 K − h2(D) − D log2(K − 1)` for a uniform `K`-ary source under
/// Hamming distortion.
pub fn kary_rd(d: f64, k: usize) -> f64 {
    let kf = k as f64;
    if d >= (kf - 1.0) / kf {
        return 0.0;
    }
    let d = d.max(0.0);
    let tail = if k > 1 { d * (kf - 1.0).log2() } else { 0.0 };
    kf.log2() - h2(d) - tail
}

/// Zero-distortion rate of `K` equiprobable relevant letters (total mass
/// `1 − q`) plus one irrelevant letter of mass `q`.
///
/// Relevant letters must be reproduced exactly, so the only freedom is the
/// distribution `r` with which the irrelevant letter is sent to the `K + 1`
/// codewords: `I(X;X̂) = H(X̂) − q H(r)`. `r` is scanned over a simplex grid
/// with the given number of divisions.
pub fn merged_codebook_rate(k: usize, q: f64, divisions: usize) -> f64 {
    let mut best = f64::INFINITY;
    let mut counts = vec![0usize; k + 1];
    visit_compositions(&mut counts, 0, divisions, &mut |c| {
        let r: Vec<f64> = c.iter().map(|&v| v as f64 / divisions as f64).collect();
        let out: Vec<f64> = (0..=k)
            .map(|j| if j < k { (1.0 - q) / k as f64 } else { 0.0 } + q * r[j])
            .collect();
        best = best.min(entropy(&out) - q * entropy(&r));
    });
    best
}

fn visit_compositions(counts: &mut [usize], pos: usize, left: usize, f: &mut impl FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        f(counts);
        return;
    }
    for v in 0..=left {
        counts[pos] = v;
        visit_compositions(counts, pos + 1, left - v, f);
    }
}
