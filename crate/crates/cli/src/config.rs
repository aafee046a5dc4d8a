//! Run configuration: a TOML file, overridden field by field from the command
//! line, then validated once.

use std::path::{Path, PathBuf};

use actionrd_codes::ldgm::{DegreeProfile, MessagePassingParams};
use actionrd_codes::multiplex::{DesignOptions, SourceCodeKind};
use actionrd_core::solver::geometric_grid;
use actionrd_core::{build_erasure, ErasureParams, Pruning, ScenarioInstance, SolverParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErasureSpec {
    pub k: usize,
    pub q: f64,
    pub p: f64,
}

impl Default for ErasureSpec {
    fn default() -> Self {
        Self { k: 4, q: 0.5, p: 0.0 }
    }
}

/// Exactly one of `file` and `erasure`; the erasure example is the default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSource {
    pub file: Option<PathBuf>,
    pub erasure: Option<ErasureSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Distortion slopes (all `<= 0`).
    pub s_grid: Vec<f64>,
    /// Cost slopes (all `<= 0`).
    pub m_grid: Vec<f64>,
    /// Distortion targets for envelope, analytic and bound tables.
    pub d_grid: Vec<f64>,
    /// Cost budgets for the same tables.
    pub c_list: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        let mut d_grid = vec![0.02];
        d_grid.extend((0..11).map(|i| round6(0.05 + 0.025 * i as f64)));
        Self {
            s_grid: geometric_grid(0.25, 64.0, 17),
            m_grid: geometric_grid(0.125, 32.0, 17),
            d_grid,
            c_list: vec![0.25, 0.5, 0.75],
        }
    }
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SourceCode {
    #[default]
    Ldgm,
    Codebook,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MessagePassingConfig {
    pub max_iters: usize,
    pub damping_start: usize,
    pub damping: f64,
    pub decimation_threshold: f64,
    pub factor_floor: f64,
}

impl Default for MessagePassingConfig {
    fn default() -> Self {
        let mp = MessagePassingParams::default();
        Self {
            max_iters: mp.max_iters,
            damping_start: mp.damping_start,
            damping: mp.damping,
            decimation_threshold: mp.decimation_llr_threshold,
            factor_floor: mp.factor_floor,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodesConfig {
    pub n: usize,
    pub trials: usize,
    /// One design per distortion target, all at `target_c`.
    pub target_d: Vec<f64>,
    pub target_c: f64,
    pub epsilon: f64,
    /// Degree-profile file; the built-in profile when absent.
    pub profile: Option<PathBuf>,
    pub source_code: SourceCode,
    pub binning: bool,
    pub mapping_d_max: usize,
    pub mapping_tol: f64,
    /// Rate gap (bits) above which a warning is printed.
    pub gap_warning: f64,
    pub message_passing: MessagePassingConfig,
}

impl Default for CodesConfig {
    fn default() -> Self {
        let base = DesignOptions::default();
        Self {
            n: base.n,
            trials: 10,
            target_d: vec![0.05, 0.1, 0.15],
            target_c: 0.25,
            epsilon: base.epsilon,
            profile: None,
            source_code: SourceCode::Ldgm,
            binning: base.binning,
            mapping_d_max: base.d_max,
            mapping_tol: base.mapping_tol,
            gap_warning: 0.15,
            message_passing: MessagePassingConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub allow_unconverged: bool,
    pub scenario: ScenarioSource,
    pub grid: GridConfig,
    pub solver: SolverParams,
    pub codes: CodesConfig,
}

/// The solver defaults used by the command line: pruning is on (it never
/// changes `R(D,C)`) and the outer loop may run long on flat slopes.
pub fn default_solver() -> SolverParams {
    SolverParams {
        pruning: Pruning::DeterministicImplication,
        max_outer: 20_000,
        ..SolverParams::default()
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            allow_unconverged: false,
            scenario: ScenarioSource::default(),
            grid: GridConfig::default(),
            solver: default_solver(),
            codes: CodesConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form, excluding where output goes.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = PathBuf::new();
        hex::encode(Sha256::digest(canon.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        match (&self.scenario.file, &self.scenario.erasure) {
            (Some(_), Some(_)) => return bad("give either a scenario file or erasure parameters, not both".into()),
            (Some(path), None) if !path.is_file() => {
                return bad(format!("scenario file {} does not exist", path.display()))
            }
            _ => {}
        }
        if let Some(path) = &self.codes.profile {
            if !path.is_file() {
                return bad(format!("degree profile {} does not exist", path.display()));
            }
        }
        for (name, grid) in [("s_grid", &self.grid.s_grid), ("m_grid", &self.grid.m_grid)] {
            if grid.is_empty() {
                return bad(format!("{name} is empty"));
            }
            if grid.iter().any(|v| !(*v <= 0.0 && v.is_finite())) {
                return bad(format!("{name} values must be finite and <= 0"));
            }
        }
        for (name, grid) in [
            ("d_grid", &self.grid.d_grid),
            ("c_list", &self.grid.c_list),
            ("target_d", &self.codes.target_d),
        ] {
            if grid.is_empty() {
                return bad(format!("{name} is empty"));
            }
            if grid.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return bad(format!("{name} values must be finite and >= 0"));
            }
        }
        if !(self.codes.target_c >= 0.0) {
            return bad("target_c must be >= 0".into());
        }
        if self.codes.n == 0 || self.codes.trials == 0 {
            return bad("n and trials must be positive".into());
        }
        self.solver.validate()?;
        self.message_passing().validate()?;
        Ok(())
    }

    pub fn scenario(&self) -> Result<ScenarioInstance> {
        match (&self.scenario.file, self.erasure()) {
            (Some(path), _) => Ok(ScenarioInstance::load(path)?),
            (None, e) => Ok(build_erasure(&ErasureParams::new(e.k, e.q, e.p, 0.0)?)?),
        }
    }

    /// The erasure parameters in effect when no scenario file is given.
    pub fn erasure(&self) -> ErasureSpec {
        self.scenario.erasure.clone().unwrap_or_default()
    }

    pub fn message_passing(&self) -> MessagePassingParams {
        let mp = &self.codes.message_passing;
        MessagePassingParams {
            max_iters: mp.max_iters,
            damping_start: mp.damping_start,
            damping: mp.damping,
            decimation_llr_threshold: mp.decimation_threshold,
            factor_floor: mp.factor_floor,
            seed: self.seed,
        }
    }

    pub fn design_options(&self) -> Result<DesignOptions> {
        let profile = match &self.codes.profile {
            Some(path) => DegreeProfile::load(path)?,
            None => DegreeProfile::default(),
        };
        Ok(DesignOptions {
            n: self.codes.n,
            epsilon: self.codes.epsilon,
            source_code: match self.codes.source_code {
                SourceCode::Ldgm => SourceCodeKind::Ldgm,
                SourceCode::Codebook => SourceCodeKind::Codebook,
            },
            binning: self.codes.binning,
            profile,
            message_passing: self.message_passing(),
            d_max: self.codes.mapping_d_max,
            mapping_tol: self.codes.mapping_tol,
            seed: self.seed,
        })
    }
}

/// Parses a grid flag: either a comma-separated list of values or
/// `geom:LO:HI:N`, which expands to `N` non-positive slopes `-LO … -HI`
/// spaced geometrically.
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    if let Some(rest) = text.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("expected geom:LO:HI:N, got {text:?}"));
        };
        let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
        let n: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
        if !(lo > 0.0 && hi >= lo) {
            return Err(format!("need 0 < LO <= HI in {text:?}"));
        }
        return Ok(geometric_grid(lo, hi, n));
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn output_dir_does_not_enter_the_hash() {
        let a = RunConfig::default();
        let b = RunConfig {
            output_dir: "elsewhere".into(),
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { seed: 1, ..RunConfig::default() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn grid_flags() {
        assert_eq!(parse_grid("-1,-2.5, 0").unwrap(), vec![-1.0, -2.5, 0.0]);
        let g = parse_grid("geom:0.25:64:17").unwrap();
        assert_eq!(g.len(), 17);
        assert!((g[0] + 0.25).abs() < 1e-12 && (g[16] + 64.0).abs() < 1e-9);
        assert!(parse_grid("geom:1:2").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("sed = 3").is_err());
        let cfg = RunConfig::from_toml_str("seed = 3\n[codes]\nn = 500\n").unwrap();
        assert_eq!((cfg.seed, cfg.codes.n, cfg.codes.trials), (3, 500, 10));
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        cfg.validate().unwrap();
        cfg.grid.s_grid = vec![0.5];
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            scenario: ScenarioSource {
                file: Some("/nonexistent/scenario.toml".into()),
                erasure: None,
            },
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
