//! Degree profiles in edge-perspective form.
//!
//! File format (plain text, `#` starts a comment):
//!
//! ```text
//! side check        # optional; `check` (default) or `bit`
//! 2 0.30            # degree, fraction of edges attached to nodes of that degree
//! 3 0.70
//! ```
//!
//! The profile fixes the degrees of one side of the graph; the other side
//! gets degrees as equal as the edge count allows.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CodeError, Result};

const FRACTION_TOL: f64 = 1e-6;

/// Which node set the profile describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProfileSide {
    /// The `n·d` check variables (codeword side).
    #[default]
    Check,
    /// The `k` message bits.
    Bit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeProfile {
    side: ProfileSide,
    /// `(degree, edge fraction)`, sorted by degree.
    terms: Vec<(usize, f64)>,
}

/// Shipped irregular check-side profile. It is a placeholder chosen for
/// decent quantization behaviour (see the README), not an optimized table.
pub const DEFAULT_PROFILE: &str = include_str!("../../profiles/default.txt");

impl Default for DegreeProfile {
    fn default() -> Self {
        Self::parse(DEFAULT_PROFILE).expect("shipped profile is valid")
    }
}

impl DegreeProfile {
    pub fn new(side: ProfileSide, mut terms: Vec<(usize, f64)>) -> Result<Self> {
        terms.sort_by_key(|t| t.0);
        if terms.is_empty() {
            return Err(CodeError::ProfileInfeasible("no degrees given".into()));
        }
        for w in terms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(CodeError::ProfileInfeasible(format!("degree {} listed twice", w[0].0)));
            }
        }
        for &(deg, frac) in &terms {
            if deg == 0 {
                return Err(CodeError::ProfileInfeasible("degree 0 is not allowed".into()));
            }
            if !(frac > 0.0 && frac <= 1.0) {
                return Err(CodeError::ProfileInfeasible(format!("fraction {frac} for degree {deg}")));
            }
        }
        let total: f64 = terms.iter().map(|t| t.1).sum();
        if (total - 1.0).abs() > FRACTION_TOL {
            return Err(CodeError::ProfileInfeasible(format!("edge fractions sum to {total}")));
        }
        Ok(Self { side, terms })
    }

    /// Every node on `side` has degree `deg`.
    pub fn regular(side: ProfileSide, deg: usize) -> Result<Self> {
        Self::new(side, vec![(deg, 1.0)])
    }

    pub fn side(&self) -> ProfileSide {
        self.side
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut side = ProfileSide::Check;
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| CodeError::ProfileParse { line: line_no, msg };
            match fields.as_slice() {
                ["side", s] => {
                    side = match *s {
                        "check" => ProfileSide::Check,
                        "bit" => ProfileSide::Bit,
                        other => return Err(err(format!("unknown side '{other}'"))),
                    }
                }
                [deg, frac] => {
                    let deg: usize = deg.parse().map_err(|_| err(format!("bad degree '{deg}'")))?;
                    let frac: f64 = frac.parse().map_err(|_| err(format!("bad fraction '{frac}'")))?;
                    terms.push((deg, frac));
                }
                _ => return Err(err(format!("expected 'degree fraction', got '{line}'"))),
            }
        }
        Self::new(side, terms)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let side = match self.side {
            ProfileSide::Check => "check",
            ProfileSide::Bit => "bit",
        };
        writeln!(out, "side {side}").unwrap();
        for (deg, frac) in &self.terms {
            writeln!(out, "{deg} {frac}").unwrap();
        }
        out
    }

    /// Average node degree `1 / Σ λ_i / i`.
    pub fn mean_degree(&self) -> f64 {
        1.0 / self.terms.iter().map(|&(d, f)| f / d as f64).sum::<f64>()
    }

    /// Node degrees for `nodes` nodes: node fractions `∝ λ_i / i`, rounded by
    /// largest remainder so the counts add up exactly.
    pub fn node_degrees(&self, nodes: usize) -> Vec<usize> {
        let weights: Vec<f64> = self.terms.iter().map(|&(d, f)| f / d as f64).collect();
        let total: f64 = weights.iter().sum();
        let scaled: Vec<f64> = weights.iter().map(|w| w / total * nodes as f64).collect();
        let mut counts: Vec<usize> = scaled.iter().map(|v| v.floor() as usize).collect();
        let missing = nodes - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&i, &j| (scaled[j] - scaled[j].floor()).total_cmp(&(scaled[i] - scaled[i].floor())));
        for &i in order.iter().take(missing) {
            counts[i] += 1;
        }
        self.terms
            .iter()
            .zip(&counts)
            .flat_map(|(&(deg, _), &c)| std::iter::repeat(deg).take(c))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_profile_parses() {
        let p = DegreeProfile::default();
        assert_eq!(p.side(), ProfileSide::Check);
        assert!(p.mean_degree() > 1.0);
    }

    #[test]
    fn round_trip_text() {
        let p = DegreeProfile::new(ProfileSide::Bit, vec![(3, 0.5), (2, 0.5)]).unwrap();
        assert_eq!(DegreeProfile::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            DegreeProfile::parse("2 0.5\nthree 0.5"),
            Err(CodeError::ProfileParse { line: 2, .. })
        ));
        assert!(DegreeProfile::parse("2 0.5\n3 0.4").is_err());
        assert!(DegreeProfile::parse("side both\n2 1.0").is_err());
    }

    #[test]
    fn node_counts_add_up() {
        let p = DegreeProfile::new(ProfileSide::Check, vec![(1, 0.1), (2, 0.3), (5, 0.6)]).unwrap();
        let degs = p.node_degrees(1001);
        assert_eq!(degs.len(), 1001);
    }
}
