use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mapping::SymbolMapping;
use super::profile::{DegreeProfile, ProfileSide};
use crate::error::{CodeError, Result};

/// Attempts per double edge before the sampler gives up.
const SWAP_ATTEMPTS: usize = 10_000;

/// Bipartite graph between `k` message bits and `n·d` check variables.
/// Check `κ` of symbol `l` has index `l·d + κ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdgmGraph {
    k: usize,
    n: usize,
    d: usize,
    seed: u64,
    /// CSR over checks: neighbors of check `c` are
    /// `check_bits[check_ptr[c]..check_ptr[c + 1]]`, sorted. Edge ids are
    /// positions in this array.
    check_ptr: Vec<usize>,
    check_bits: Vec<u32>,
    /// CSR over bits: edge ids incident to each bit, increasing.
    bit_ptr: Vec<usize>,
    bit_edges: Vec<u32>,
}

impl LdgmGraph {
    /// Builds a graph from explicit check neighbor lists.
    pub fn from_adjacency(k: usize, n: usize, d: usize, adjacency: &[Vec<usize>]) -> Result<Self> {
        if adjacency.len() != n * d {
            return Err(CodeError::InvalidParams(format!(
                "{} check lists for n·d = {}",
                adjacency.len(),
                n * d
            )));
        }
        let mut lists = Vec::with_capacity(adjacency.len());
        for (c, list) in adjacency.iter().enumerate() {
            let mut list: Vec<u32> = list.iter().map(|&b| b as u32).collect();
            list.sort_unstable();
            if list.is_empty() {
                return Err(CodeError::ProfileInfeasible(format!("check {c} has no neighbor")));
            }
            if list.windows(2).any(|w| w[0] == w[1]) || list.iter().any(|&b| b as usize >= k) {
                return Err(CodeError::InvalidParams(format!("check {c} has invalid neighbors")));
            }
            lists.push(list);
        }
        Ok(Self::assemble(k, n, d, 0, lists))
    }

    fn assemble(k: usize, n: usize, d: usize, seed: u64, lists: Vec<Vec<u32>>) -> Self {
        let mut check_ptr = Vec::with_capacity(lists.len() + 1);
        check_ptr.push(0);
        let mut check_bits = Vec::new();
        for list in &lists {
            check_bits.extend_from_slice(list);
            check_ptr.push(check_bits.len());
        }
        let mut bit_deg = vec![0usize; k];
        for &b in &check_bits {
            bit_deg[b as usize] += 1;
        }
        let mut bit_ptr = vec![0usize; k + 1];
        for b in 0..k {
            bit_ptr[b + 1] = bit_ptr[b] + bit_deg[b];
        }
        let mut fill = bit_ptr.clone();
        let mut bit_edges = vec![0u32; check_bits.len()];
        for (e, &b) in check_bits.iter().enumerate() {
            bit_edges[fill[b as usize]] = e as u32;
            fill[b as usize] += 1;
        }
        Self {
            k,
            n,
            d,
            seed,
            check_ptr,
            check_bits,
            bit_ptr,
            bit_edges,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_checks(&self) -> usize {
        self.n * self.d
    }

    pub fn num_edges(&self) -> usize {
        self.check_bits.len()
    }

    /// Sorted message-bit neighbors of check `c`.
    pub fn check_neighbors(&self, c: usize) -> &[u32] {
        &self.check_bits[self.check_ptr[c]..self.check_ptr[c + 1]]
    }

    pub(crate) fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_ptr[c]..self.check_ptr[c + 1]
    }

    pub(crate) fn bit_edge_ids(&self, b: usize) -> &[u32] {
        &self.bit_edges[self.bit_ptr[b]..self.bit_ptr[b + 1]]
    }

    pub fn bit_degree(&self, b: usize) -> usize {
        self.bit_ptr[b + 1] - self.bit_ptr[b]
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_ptr[c + 1] - self.check_ptr[c]
    }

    /// Check layer `g = bits · G` over GF(2).
    pub fn checks(&self, bits: &[u8]) -> Vec<u8> {
        assert_eq!(bits.len(), self.k, "message length mismatch");
        (0..self.num_checks())
            .map(|c| self.check_neighbors(c).iter().fold(0u8, |acc, &b| acc ^ bits[b as usize]))
            .collect()
    }
}

/// Degrees as equal as possible, summing to `edges`.
fn even_degrees(nodes: usize, edges: usize) -> Vec<usize> {
    let base = edges / nodes;
    let extra = edges % nodes;
    (0..nodes).map(|i| base + usize::from(i < extra)).collect()
}

/// Samples a graph with the given degree profile by configuration-model
/// pairing, then removes double edges by random socket swaps.
pub fn build_graph(
    k: usize,
    n: usize,
    mapping: &SymbolMapping,
    profile: &DegreeProfile,
    seed: u64,
) -> Result<LdgmGraph> {
    let d = mapping.d();
    let num_checks = n * d;
    if k == 0 || num_checks == 0 {
        return Err(CodeError::InvalidParams(format!("need k >= 1 and n·d >= 1 (k = {k}, n·d = {num_checks})")));
    }
    if k > num_checks {
        return Err(CodeError::InvalidParams(format!("k = {k} exceeds n·d = {num_checks}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut check_deg, mut bit_deg) = match profile.side() {
        ProfileSide::Check => {
            // tiny codes cannot host the profile's largest degrees; cap them
            let check_deg: Vec<usize> = profile.node_degrees(num_checks).into_iter().map(|g| g.min(k)).collect();
            let edges = check_deg.iter().sum();
            (check_deg, even_degrees(k, edges))
        }
        ProfileSide::Bit => {
            let bit_deg = profile.node_degrees(k);
            let edges: usize = bit_deg.iter().sum();
            if edges < num_checks {
                return Err(CodeError::ProfileInfeasible(format!(
                    "{edges} edges cannot reach all {num_checks} checks"
                )));
            }
            (even_degrees(num_checks, edges), bit_deg)
        }
    };
    check_deg.shuffle(&mut rng);
    bit_deg.shuffle(&mut rng);
    if check_deg.iter().any(|&g| g > k) || bit_deg.iter().any(|&g| g > num_checks) {
        return Err(CodeError::ProfileInfeasible("a node degree exceeds the opposite side size".into()));
    }
    if check_deg.iter().sum::<usize>() != bit_deg.iter().sum::<usize>() {
        return Err(CodeError::ProfileInfeasible("degree sums differ".into()));
    }

    let mut sockets: Vec<u32> = bit_deg
        .iter()
        .enumerate()
        .flat_map(|(b, &g)| std::iter::repeat(b as u32).take(g))
        .collect();
    sockets.shuffle(&mut rng);
    let mut lists: Vec<Vec<u32>> = Vec::with_capacity(num_checks);
    let mut pos = 0;
    for &g in &check_deg {
        lists.push(sockets[pos..pos + g].to_vec());
        pos += g;
    }

    for c in 0..num_checks {
        let mut i = 0;
        while i < lists[c].len() {
            let b = lists[c][i];
            if !lists[c][..i].contains(&b) {
                i += 1;
                continue;
            }
            let mut fixed = false;
            for _ in 0..SWAP_ATTEMPTS {
                let c2 = rng.gen_range(0..num_checks);
                if c2 == c || lists[c2].contains(&b) {
                    continue;
                }
                let j = rng.gen_range(0..lists[c2].len());
                let b2 = lists[c2][j];
                if lists[c].contains(&b2) {
                    continue;
                }
                lists[c][i] = b2;
                lists[c2][j] = b;
                fixed = true;
                break;
            }
            if !fixed {
                return Err(CodeError::ProfileInfeasible(format!("could not remove a double edge at check {c}")));
            }
            i += 1;
        }
    }
    for list in &mut lists {
        list.sort_unstable();
    }
    Ok(LdgmGraph::assemble(k, n, d, seed, lists))
}

/// `A_l = φ(g_{1,l}, …, g_{d,l})` with `g = bits · G`.
pub fn forward_map(bits: &[u8], graph: &LdgmGraph, mapping: &SymbolMapping) -> Vec<usize> {
    symbols_from_checks(&graph.checks(bits), graph.n(), mapping)
}

pub(crate) fn symbols_from_checks(checks: &[u8], n: usize, mapping: &SymbolMapping) -> Vec<usize> {
    let d = mapping.d();
    (0..n)
        .map(|l| {
            let pattern = checks[l * d..(l + 1) * d]
                .iter()
                .fold(0usize, |acc, &g| (acc << 1) | g as usize);
            mapping.phi(pattern)
        })
        .collect()
}
