//! Entropy and information measures on raw probability arrays.

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

pub fn h2(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// `None` when `p` puts mass where `q` has none.
pub fn kl(p: &[f64], q: &[f64]) -> Option<f64> {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return None;
            }
            acc += a * (a / b).log2();
        }
    }
    Some(acc)
}

/// `I(A;B)` for a two-dimensional table `joint[a][b]`, computed as the
/// divergence from the product of marginals.
pub fn mutual_information_2d(joint: &[Vec<f64>]) -> f64 {
    let pa: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let nb = joint.first().map_or(0, Vec::len);
    let pb: Vec<f64> = (0..nb).map(|b| joint.iter().map(|r| r[b]).sum()).collect();
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    let product: Vec<f64> = pa.iter().flat_map(|&a| pb.iter().map(move |&b| a * b)).collect();
    kl(&flat, &product).expect("product of marginals dominates the joint")
}
