use actionrd_codes::binning::*;
use actionrd_testkit::wz::exhaustive_bsc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bits_of(word: u32, n: usize) -> Vec<usize> {
    (0..n).map(|j| ((word >> (n - 1 - j)) & 1) as usize).collect()
}

fn bsc_table(p: f64) -> JointLogTable {
    JointLogTable::from_joint(&[vec![0.5 * (1.0 - p), 0.5 * p], vec![0.5 * p, 0.5 * (1.0 - p)]]).unwrap()
}

fn random_words(count: usize, n: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0..1u32 << n)).collect()
}

/// Runs the library decoder over every bin and every side-information word
/// and accumulates the same statistics as the exhaustive reference.
fn library_stats(words: &[u32], n: usize, num_bins: usize, p: f64, seed: u64) -> (Binning, Vec<usize>, usize, f64) {
    let codebook = Codebook::new(n, 2, words.iter().map(|&w| bits_of(w, n)).collect()).unwrap();
    let binning = Binning::new(words.len(), num_bins, seed).unwrap();
    let table = bsc_table(p);
    let flip: Vec<f64> = (0..=n as i32).map(|k| p.powi(k) * (1.0 - p).powi(n as i32 - k)).collect();
    let mut decisions = vec![0; num_bins << n];
    let mut ties = 0;
    let mut error = 0.0;
    for b in 0..num_bins {
        for y in 0..1u32 << n {
            let dec = wz_decode(b, &bits_of(y, n), &codebook, &binning, &table);
            decisions[(b << n) + y as usize] = dec.codeword;
            ties += usize::from(dec.ambiguous);
            for &c in binning.members(b) {
                if c != dec.codeword {
                    error += flip[(words[c] ^ y).count_ones() as usize];
                }
            }
        }
    }
    (binning, decisions, ties, error / words.len() as f64)
}

#[test]
fn bins_partition_the_codebook() {
    let binning = Binning::new(1000, 37, 4).unwrap();
    let mut all: Vec<usize> = (0..37).flat_map(|b| binning.members(b).to_vec()).collect();
    all.sort_unstable();
    assert_eq!(all, (0..1000).collect::<Vec<_>>());
    assert!((0..37).all(|b| !binning.members(b).is_empty()));
    assert_eq!(bin_index(40, 37), 3);
    assert!(Binning::new(10, 11, 0).is_err());
}

#[test]
fn one_codeword_per_bin_decodes_exactly() {
    let n = 8;
    let words = random_words(16, n, 1);
    let codebook = Codebook::new(n, 2, words.iter().map(|&w| bits_of(w, n)).collect()).unwrap();
    let binning = Binning::new(16, 16, 3).unwrap();
    let table = bsc_table(0.2);
    for i in 0..16 {
        for y in [0u32, 0xff, words[i] ^ 0b1011] {
            let dec = wz_decode(binning.bin_of(i), &bits_of(y, n), &codebook, &binning, &table);
            assert_eq!(dec.codeword, i);
            assert!(!dec.ambiguous);
        }
    }
}

#[test]
fn single_bin_is_maximum_likelihood() {
    let n = 10;
    let words = random_words(32, n, 2);
    let codebook = Codebook::new(n, 2, words.iter().map(|&w| bits_of(w, n)).collect()).unwrap();
    let binning = Binning::new(32, 1, 0).unwrap();
    let table = bsc_table(0.1);
    for y in (0..1u32 << n).step_by(7) {
        let dec = wz_decode(0, &bits_of(y, n), &codebook, &binning, &table);
        let best = words.iter().map(|w| (w ^ y).count_ones()).min().unwrap();
        let first = words.iter().position(|w| (w ^ y).count_ones() == best).unwrap();
        assert_eq!(dec.codeword, first, "ties resolve to the lowest index");
    }
}

#[test]
fn toy_codebook_matches_exhaustive_enumeration() {
    let n = 6;
    let words = random_words(8, n, 5);
    let p = 0.15;
    let (binning, decisions, ties, error) = library_stats(&words, n, 2, p, 9);
    let bin_of: Vec<usize> = (0..8).map(|i| binning.bin_of(i)).collect();
    let reference = exhaustive_bsc(&words, &bin_of, 2, n as u32, p);
    assert_eq!(decisions, reference.decisions);
    assert_eq!(ties, reference.ties);
    assert!((error - reference.error_probability).abs() < 1e-12);
}

#[test]
fn shorter_side_information_scores_a_prefix() {
    let codebook = Codebook::new(4, 2, vec![vec![0, 0, 1, 1], vec![0, 1, 0, 0]]).unwrap();
    let binning = Binning::new(2, 1, 0).unwrap();
    let dec = wz_decode(0, &[0, 0], &codebook, &binning, &bsc_table(0.1));
    assert_eq!(dec.codeword, 0);
}

#[test]
fn random_codebooks_follow_their_pmf() {
    let cb = Codebook::random(10, 50, &[0.2, 0.8], 3).unwrap();
    assert_eq!(cb.size(), 1024);
    let ones: usize = (0..cb.size()).map(|i| cb.word(i).filter(|&s| s == 1).count()).sum();
    let frac = ones as f64 / (1024.0 * 50.0);
    assert!((frac - 0.8).abs() < 0.01, "{frac}");
    assert!(Codebook::random(MAX_CODEBOOK_BITS + 1, 4, &[1.0], 0).is_err());
}
