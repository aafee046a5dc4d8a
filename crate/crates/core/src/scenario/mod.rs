//! Problem instances: source, action-dependent channel, distortion and cost.

mod erasure;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::prob::{Pmf, ZERO_TOL};

pub use erasure::{analytic_rdc, build_erasure, classic_rd, symmetric_rd, ErasureParams};

/// Side-information channel `P_{Y|X,A}` stored as a dense `x`-major table.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionChannel {
    nx: usize,
    na: usize,
    ny: usize,
    data: Vec<f64>,
}

impl ActionChannel {
    /// `rows[a][x]` is the pmf of `Y` given `(x, a)`.
    pub fn new(rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let na = rows.len();
        let nx = rows.first().map_or(0, Vec::len);
        let ny = rows.first().and_then(|r| r.first()).map_or(0, Vec::len);
        if na == 0 || nx == 0 || ny == 0 {
            return Err(Error::InvalidScenario("channel table is empty".into()));
        }
        let mut data = vec![0.0; nx * na * ny];
        for (a, per_x) in rows.iter().enumerate() {
            if per_x.len() != nx {
                return Err(Error::ShapeMismatch(format!(
                    "channel[{a}] has {} rows, expected {nx}",
                    per_x.len()
                )));
            }
            for (x, row) in per_x.iter().enumerate() {
                if row.len() != ny {
                    return Err(Error::ShapeMismatch(format!(
                        "channel[{a}][{x}] has {} entries, expected {ny}",
                        row.len()
                    )));
                }
                Pmf::new(row.clone()).map_err(|e| {
                    Error::InvalidScenario(format!("channel[{a}][{x}] is not a pmf: {e}"))
                })?;
                data[(x * na + a) * ny..(x * na + a + 1) * ny].copy_from_slice(row);
            }
        }
        Ok(Self { nx, na, ny, data })
    }

    pub fn num_x(&self) -> usize {
        self.nx
    }

    pub fn num_a(&self) -> usize {
        self.na
    }

    pub fn num_y(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn prob(&self, x: usize, a: usize, y: usize) -> f64 {
        self.data[(x * self.na + a) * self.ny + y]
    }

    #[inline]
    pub fn row(&self, x: usize, a: usize) -> &[f64] {
        let off = (x * self.na + a) * self.ny;
        &self.data[off..off + self.ny]
    }

    fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.na)
            .map(|a| (0..self.nx).map(|x| self.row(x, a).to_vec()).collect())
            .collect()
    }
}

/// Symbol names for the four alphabets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub a: Vec<String>,
    pub xhat: Vec<String>,
}

/// On-disk layout of a scenario file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    px: Vec<f64>,
    cost: Vec<f64>,
    distortion: Vec<Vec<f64>>,
    channel: Vec<Vec<Vec<f64>>>,
    alphabets: Alphabets,
}

#[derive(Clone, Debug)]
pub struct ScenarioInstance {
    name: Option<String>,
    alphabets: Alphabets,
    px: Pmf,
    channel: ActionChannel,
    distortion: Vec<f64>,
    cost: Vec<f64>,
}

impl ScenarioInstance {
    /// Validates and assembles an instance. `distortion[x][xhat]`, `cost[a]`.
    pub fn new(
        alphabets: Alphabets,
        px: Pmf,
        channel: ActionChannel,
        distortion: Vec<Vec<f64>>,
        cost: Vec<f64>,
    ) -> Result<Self> {
        let (nx, ny, na, nxh) = (
            alphabets.x.len(),
            alphabets.y.len(),
            alphabets.a.len(),
            alphabets.xhat.len(),
        );
        if nx == 0 || ny == 0 || na == 0 || nxh == 0 {
            return Err(Error::InvalidScenario("alphabets must be non-empty".into()));
        }
        if px.len() != nx {
            return Err(Error::ShapeMismatch(format!("px has {} entries, |X| = {nx}", px.len())));
        }
        if channel.num_x() != nx || channel.num_a() != na || channel.num_y() != ny {
            return Err(Error::ShapeMismatch(format!(
                "channel is {}x{}x{} (a,x,y), expected {na}x{nx}x{ny}",
                channel.num_a(),
                channel.num_x(),
                channel.num_y()
            )));
        }
        if distortion.len() != nx || distortion.iter().any(|r| r.len() != nxh) {
            return Err(Error::ShapeMismatch(format!("distortion must be {nx}x{nxh}")));
        }
        if cost.len() != na {
            return Err(Error::ShapeMismatch(format!("cost has {} entries, |A| = {na}", cost.len())));
        }
        let flat: Vec<f64> = distortion.into_iter().flatten().collect();
        if flat.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidScenario("distortion entries must be finite and >= 0".into()));
        }
        for x in 0..nx {
            if !flat[x * nxh..(x + 1) * nxh].iter().any(|&d| d <= ZERO_TOL) {
                return Err(Error::InvalidScenario(format!(
                    "source symbol {} has no zero-distortion reconstruction",
                    alphabets.x[x]
                )));
            }
        }
        if cost.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidScenario("action costs must be finite and >= 0".into()));
        }
        if !cost.iter().any(|&c| c <= ZERO_TOL) {
            return Err(Error::InvalidScenario("some action must have zero cost".into()));
        }
        Ok(Self {
            name: None,
            alphabets,
            px,
            channel,
            distortion: flat,
            cost,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    pub fn num_x(&self) -> usize {
        self.alphabets.x.len()
    }

    pub fn num_y(&self) -> usize {
        self.alphabets.y.len()
    }

    pub fn num_a(&self) -> usize {
        self.alphabets.a.len()
    }

    pub fn num_xhat(&self) -> usize {
        self.alphabets.xhat.len()
    }

    pub fn px(&self) -> &Pmf {
        &self.px
    }

    pub fn channel(&self) -> &ActionChannel {
        &self.channel
    }

    #[inline]
    pub fn distortion(&self, x: usize, xhat: usize) -> f64 {
        self.distortion[x * self.num_xhat() + xhat]
    }

    #[inline]
    pub fn cost(&self, a: usize) -> f64 {
        self.cost[a]
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.iter().copied().fold(0.0, f64::max)
    }

    /// Lowest-index reconstruction with zero distortion for `x`.
    pub fn best_recon(&self, x: usize) -> usize {
        (0..self.num_xhat())
            .find(|&xh| self.distortion(x, xh) <= ZERO_TOL)
            .expect("validated: every x has a zero-distortion reconstruction")
    }

    /// Reconstruction minimizing expected distortion under a posterior on `X`
    /// (ties to the lowest index).
    pub fn bayes_recon(&self, posterior: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for xh in 0..self.num_xhat() {
            let risk: f64 = posterior
                .iter()
                .enumerate()
                .map(|(x, &w)| w * self.distortion(x, xh))
                .sum();
            if risk < best.0 - 1e-12 {
                best = (risk, xh);
            }
        }
        best.1
    }

    /// The same problem with the action alphabet restricted to `a` alone.
    /// The retained action is given cost 0; callers account for `Δ(a)`.
    pub fn restrict_to_action(&self, a: usize) -> Result<Self> {
        if a >= self.num_a() {
            return Err(Error::InvalidScenario(format!("action index {a} out of range")));
        }
        let rows = vec![(0..self.num_x()).map(|x| self.channel.row(x, a).to_vec()).collect()];
        let mut alphabets = self.alphabets.clone();
        alphabets.a = vec![self.alphabets.a[a].clone()];
        Self::new(alphabets, self.px.clone(), ActionChannel::new(&rows)?, self.distortion_rows(), vec![0.0])
    }

    /// The same problem with the source distribution replaced.
    pub fn with_px(&self, px: Pmf) -> Result<Self> {
        Self::new(
            self.alphabets.clone(),
            px,
            self.channel.clone(),
            self.distortion_rows(),
            self.cost.clone(),
        )
    }

    fn distortion_rows(&self) -> Vec<Vec<f64>> {
        self.distortion.chunks(self.num_xhat()).map(<[f64]>::to_vec).collect()
    }

    fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            px: self.px.probs().to_vec(),
            cost: self.cost.clone(),
            distortion: self.distortion_rows(),
            channel: self.channel.to_nested(),
            alphabets: self.alphabets.clone(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let px = Pmf::new(file.px).map_err(|e| Error::InvalidScenario(format!("px: {e}")))?;
        let channel = ActionChannel::new(&file.channel)?;
        let inst = Self::new(file.alphabets, px, channel, file.distortion, file.cost)?;
        Ok(match file.name {
            Some(n) => inst.with_name(n),
            None => inst,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_file()).expect("scenario serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// SHA-256 of the canonical serialization (name excluded), hex encoded.
    pub fn hash(&self) -> String {
        let mut file = self.to_file();
        file.name = None;
        let text = toml::to_string(&file).expect("scenario serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
