//! Finite-alphabet probability arithmetic.
//!
//! All values are stored in the linear domain. Logarithms are base 2 and are
//! taken lazily through [`log2_floor`], so every rate and divergence in this
//! crate is in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::ActionChannel;

/// Entries below this are treated as exact zeros for support checks.
pub const ZERO_TOL: f64 = 1e-15;
/// Tolerance on the total mass of a pmf.
pub const SUM_TOL: f64 = 1e-12;
/// Floor applied before taking a logarithm.
pub const LOG_FLOOR: f64 = 1e-300;

#[inline]
pub fn log2_floor(p: f64) -> f64 {
    p.max(LOG_FLOOR).log2()
}

/// `log2(sum_i 2^{v_i})`, returning `-inf` for an empty or all `-inf` input.
pub fn log2_sum_exp2(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.into_iter().map(|v| (v - max).exp2()).sum();
    max + sum.log2()
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    let term = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
    term(p) + term(1.0 - p)
}

fn check_entries(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf("empty alphabet".into()));
    }
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidPmf(format!("entry {i} is {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidPmf(format!("mass is {total}, expected 1")));
    }
    Ok(())
}

/// A probability vector over a positionally indexed alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs)?;
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights into a pmf.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidPmf("weights must be nonnegative with positive mass".into()));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform pmf needs a non-empty alphabet");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, index: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .filter(|p| **p > ZERO_TOL)
            .map(|p| -p * p.log2())
            .sum()
    }

    pub fn total_variation(&self, other: &Pmf) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

impl std::ops::Index<usize> for Pmf {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Vec<f64> {
        p.probs
    }
}

/// Kullback-Leibler divergence `D(p||q)` in bits.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "pmfs over {} and {} symbols",
            p.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.probs.iter().zip(&q.probs).enumerate() {
        if pi <= ZERO_TOL {
            continue;
        }
        if qi <= ZERO_TOL {
            return Err(Error::AbsoluteContinuityViolation { index: i, p: pi });
        }
        total += pi * (pi / qi).log2();
    }
    Ok(total.max(0.0))
}

/// A stochastic matrix: one pmf per conditioning symbol, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalPmf {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ConditionalPmf {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged conditional pmf".into()));
        }
        let n = rows.len();
        Self::from_flat(n, cols, rows.into_iter().flatten().collect())
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} conditional",
                data.len()
            )));
        }
        for r in 0..rows {
            check_entries(&data[r * cols..(r + 1) * cols])
                .map_err(|e| Error::InvalidPmf(format!("row {r}: {e}")))?;
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nonnegative weights, normalizing every row.
    pub fn from_weights(rows: usize, cols: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch("weight table size".into()));
        }
        for r in 0..rows {
            let row = &mut data[r * cols..(r + 1) * cols];
            let total: f64 = row.iter().sum();
            if !(total > 0.0) || !total.is_finite() {
                return Err(Error::InvalidPmf(format!("row {r} has no mass")));
            }
            row.iter_mut().for_each(|v| *v /= total);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![1.0 / cols as f64; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_pmf(&self, r: usize) -> Pmf {
        Pmf {
            probs: self.row(r).to_vec(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs_diff(&self, other: &ConditionalPmf) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A joint pmf over a product alphabet with labelled axes (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    labels: Vec<String>,
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl JointPmf {
    pub fn new(labels: &[&str], shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if labels.len() != shape.len() {
            return Err(Error::ShapeMismatch("one label per axis required".into()));
        }
        let mut seen = labels.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != labels.len() {
            return Err(Error::AxisMismatch(format!("duplicate labels in {labels:?}")));
        }
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for shape {shape:?}",
                data.len()
            )));
        }
        check_entries(&data)?;
        Ok(Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            shape: shape.to_vec(),
            data,
        })
    }

    pub(crate) fn from_parts_unchecked(labels: &[&str], shape: &[usize], data: Vec<f64>) -> Self {
        Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        for (i, (&ix, &dim)) in index.iter().zip(&self.shape).enumerate() {
            debug_assert!(ix < dim, "index {ix} out of range on axis {i}");
            flat = flat * dim + ix;
        }
        self.data[flat]
    }

    fn axis(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::AxisMismatch(format!("no axis named {label:?}")))
    }

    /// Marginal onto the named axes, in the order given.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointPmf> {
        let axes: Vec<usize> = keep.iter().map(|l| self.axis(l)).collect::<Result<_>>()?;
        let mut sorted = axes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != axes.len() {
            return Err(Error::AxisMismatch(format!("repeated axis in {keep:?}")));
        }
        let out_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let mut out = vec![0.0; out_shape.iter().product()];
        let mut index = vec![0usize; self.shape.len()];
        for &v in &self.data {
            let mut flat = 0;
            for (&a, &dim) in axes.iter().zip(&out_shape) {
                flat = flat * dim + index[a];
            }
            out[flat] += v;
            // odometer increment over the full index
            for ax in (0..self.shape.len()).rev() {
                index[ax] += 1;
                if index[ax] < self.shape[ax] {
                    break;
                }
                index[ax] = 0;
            }
        }
        Ok(JointPmf::from_parts_unchecked(keep, &out_shape, out))
    }

    /// Entropy of the marginal on `axes` (empty set has entropy 0).
    pub fn entropy_of(&self, axes: &[&str]) -> Result<f64> {
        if axes.is_empty() {
            return Ok(0.0);
        }
        let m = self.marginal(axes)?;
        Ok(m.data
            .iter()
            .filter(|p| **p > ZERO_TOL)
            .map(|p| -p * p.log2())
            .sum())
    }

    /// Conditional mutual information `I(A;B|C)` in bits.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], cond: &[&str]) -> Result<f64> {
        let mut all: Vec<&str> = a.iter().chain(b).chain(cond).copied().collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != n || a.is_empty() || b.is_empty() {
            return Err(Error::AxisMismatch(format!(
                "axis groups {a:?}, {b:?}, {cond:?} must be disjoint and non-empty"
            )));
        }
        fn join<'s>(x: &[&'s str], y: &[&'s str]) -> Vec<&'s str> {
            x.iter().chain(y).copied().collect()
        }
        let ac = join(a, cond);
        let bc = join(b, cond);
        let abc = join(&join(a, b), cond);
        let value = self.entropy_of(&ac)? + self.entropy_of(&bc)?
            - self.entropy_of(&abc)?
            - self.entropy_of(cond)?;
        Ok(value.max(0.0))
    }
}

/// Joint pmf over (X, Y, T) from `P_X(x) P_{T|X}(t|x) P_{Y|X,A}(y|x,a(t))`.
pub fn build_joint(
    px: &Pmf,
    ptx: &ConditionalPmf,
    channel: &ActionChannel,
    action_of: impl Fn(usize) -> usize,
) -> Result<JointPmf> {
    let (nx, nt, ny) = (px.len(), ptx.cols(), channel.num_y());
    if ptx.rows() != nx || channel.num_x() != nx {
        return Err(Error::ShapeMismatch(format!(
            "px has {nx} symbols, ptx has {} rows, channel has {} inputs",
            ptx.rows(),
            channel.num_x()
        )));
    }
    let mut data = vec![0.0; nx * ny * nt];
    for x in 0..nx {
        for t in 0..nt {
            let a = action_of(t);
            if a >= channel.num_a() {
                return Err(Error::ShapeMismatch(format!("strategy {t} maps to action {a}")));
            }
            let w = px[x] * ptx.get(x, t);
            for y in 0..ny {
                data[(x * ny + y) * nt + t] = w * channel.prob(x, a, y);
            }
        }
    }
    Ok(JointPmf::from_parts_unchecked(&["x", "y", "t"], &[nx, ny, nt], data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kl_examples() {
        let half = Pmf::uniform(2);
        assert_eq!(kl_divergence(&half, &half).unwrap(), 0.0);
        assert_abs_diff_eq!(kl_divergence(&Pmf::point(2, 0), &half).unwrap(), 1.0, epsilon = 1e-15);
        let p = Pmf::new(vec![0.25, 0.75]).unwrap();
        // 0.25 log2(0.5) + 0.75 log2(1.5)
        assert_abs_diff_eq!(kl_divergence(&p, &half).unwrap(), 0.188_721_875_540_867, epsilon = 1e-12);
    }

    #[test]
    fn kl_rejects_missing_support() {
        let err = kl_divergence(&Pmf::uniform(2), &Pmf::point(2, 0)).unwrap_err();
        assert!(matches!(err, Error::AbsoluteContinuityViolation { index: 1, .. }));
    }

    #[test]
    fn pmf_validation() {
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![-0.1, 1.1]).is_err());
        assert!(Pmf::new(vec![]).is_err());
        assert!(ConditionalPmf::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let indep = JointPmf::new(&["a", "b"], &[2, 2], vec![0.25; 4]).unwrap();
        assert_abs_diff_eq!(indep.mutual_information(&["a"], &["b"], &[]).unwrap(), 0.0, epsilon = 1e-15);

        let same = JointPmf::new(&["a", "b"], &[2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(same.mutual_information(&["a"], &["b"], &[]).unwrap(), 1.0, epsilon = 1e-15);

        let f = 0.11;
        let bsc = JointPmf::new(&["x", "y"], &[2, 2], vec![(1.0 - f) / 2.0, f / 2.0, f / 2.0, (1.0 - f) / 2.0])
            .unwrap();
        let mi = bsc.mutual_information(&["x"], &["y"], &[]).unwrap();
        assert_abs_diff_eq!(mi, 1.0 - h2(f), epsilon = 1e-12);
        assert_abs_diff_eq!(mi, 0.500_084_04, epsilon = 1e-8);
    }

    #[test]
    fn mutual_information_rejects_bad_axes() {
        let j = JointPmf::new(&["a", "b"], &[2, 2], vec![0.25; 4]).unwrap();
        assert!(j.mutual_information(&["a"], &["a"], &[]).is_err());
        assert!(j.mutual_information(&["a"], &["z"], &[]).is_err());
    }

    #[test]
    fn marginal_reorders_axes() {
        let j = JointPmf::new(&["a", "b"], &[2, 3], vec![0.1, 0.2, 0.0, 0.3, 0.15, 0.25]).unwrap();
        let m = j.marginal(&["b", "a"]).unwrap();
        assert_eq!(m.shape(), &[3, 2]);
        assert_abs_diff_eq!(m.get(&[1, 1]), 0.15, epsilon = 1e-15);
        let mb = j.marginal(&["b"]).unwrap();
        assert_abs_diff_eq!(mb.get(&[0]), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn log_sum_exp_handles_neg_infinity() {
        assert_eq!(log2_sum_exp2([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_abs_diff_eq!(log2_sum_exp2([0.0, 0.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(log2_sum_exp2([-2000.0, -2000.0]), -1999.0, epsilon = 1e-9);
    }
}
