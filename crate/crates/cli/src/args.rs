use std::path::PathBuf;

use actionrd_core::{Pruning, StepRule};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_grid, ErasureSpec, RunConfig, SourceCode};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "actionrd", version, about = "Rate-distortion-cost curves and code simulations for source coding with decoder actions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every (s, m) on the grid and write the curve and its envelope.
    Sweep {
        /// Also compute the baseline with source-independent actions.
        #[arg(long)]
        nonadaptive: bool,
    },
    /// Solve a single (s, m) point.
    Point {
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
    },
    /// Closed-form reference for the erasure example (p = 0 only).
    Analytic,
    /// Design codes for each distortion target, simulate them and check the
    /// results against the bound.
    Codes,
    /// Smallest zero-rate distortion for each cost budget.
    Dmax,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PruningArg {
    None,
    SupportEquivalent,
    DeterministicImplication,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StepRuleArg {
    Harmonic,
    Normalized,
}

/// Every flag overrides the matching field of the configuration file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub allow_unconverged: bool,

    /// Scenario file (replaces any erasure parameters).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Erasure example: number of relevant letters.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Erasure example: mass of the irrelevant letter.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Erasure example: erasure probability.
    #[arg(long, global = true)]
    pub p: Option<f64>,

    /// Comma-separated slopes or geom:LO:HI:N.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = grid)]
    pub s_grid: Option<Grid>,
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = grid)]
    pub m_grid: Option<Grid>,
    #[arg(long, global = true, value_parser = grid)]
    pub d_grid: Option<Grid>,
    #[arg(long, global = true, value_parser = grid)]
    pub c_list: Option<Grid>,

    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub step_rule: Option<StepRuleArg>,
    #[arg(long, global = true)]
    pub outer_tol: Option<f64>,
    #[arg(long, global = true)]
    pub inner_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_outer: Option<usize>,
    #[arg(long, global = true)]
    pub max_inner: Option<usize>,
    #[arg(long, global = true)]
    pub pruning: Option<PruningArg>,

    /// Block length of the simulated codes.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true, value_parser = grid)]
    pub target_d: Option<Grid>,
    #[arg(long, global = true)]
    pub target_c: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Degree-profile file.
    #[arg(long, global = true)]
    pub profile: Option<PathBuf>,
    #[arg(long, global = true)]
    pub source_code: Option<SourceCode>,
    /// Send full codeword indices instead of bin indices.
    #[arg(long, global = true)]
    pub no_binning: bool,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub damping_start: Option<usize>,
    #[arg(long, global = true)]
    pub damping: Option<f64>,
    #[arg(long, global = true)]
    pub decimation_threshold: Option<f64>,
}

/// A parsed list flag (see [`parse_grid`]).
#[derive(Clone, Debug)]
pub struct Grid(pub Vec<f64>);

fn grid(text: &str) -> std::result::Result<Grid, String> {
    parse_grid(text).map(Grid)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Overrides {
    /// Loads the configuration file (or the defaults) and applies the flags.
    pub fn resolve(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.output_dir, self.out);
        cfg.allow_unconverged |= self.allow_unconverged;

        if let Some(path) = self.scenario {
            cfg.scenario.file = Some(path);
            cfg.scenario.erasure = None;
        }
        if self.k.is_some() || self.q.is_some() || self.p.is_some() {
            let mut e = cfg.scenario.erasure.take().unwrap_or_else(ErasureSpec::default);
            set(&mut e.k, self.k);
            set(&mut e.q, self.q);
            set(&mut e.p, self.p);
            cfg.scenario.erasure = Some(e);
            cfg.scenario.file = None;
        }

        let grid = &mut cfg.grid;
        set(&mut grid.s_grid, self.s_grid.map(|g| g.0));
        set(&mut grid.m_grid, self.m_grid.map(|g| g.0));
        set(&mut grid.d_grid, self.d_grid.map(|g| g.0));
        set(&mut grid.c_list, self.c_list.map(|g| g.0));

        let solver = &mut cfg.solver;
        set(&mut solver.beta, self.beta);
        set(&mut solver.outer_tol, self.outer_tol);
        set(&mut solver.inner_tol, self.inner_tol);
        set(&mut solver.max_outer, self.max_outer);
        set(&mut solver.max_inner, self.max_inner);
        if let Some(rule) = self.step_rule {
            solver.step_rule = match rule {
                StepRuleArg::Harmonic => StepRule::Harmonic,
                StepRuleArg::Normalized => StepRule::Normalized,
            };
        }
        if let Some(p) = self.pruning {
            solver.pruning = match p {
                PruningArg::None => Pruning::None,
                PruningArg::SupportEquivalent => Pruning::SupportEquivalent,
                PruningArg::DeterministicImplication => Pruning::DeterministicImplication,
            };
        }

        let codes = &mut cfg.codes;
        set(&mut codes.n, self.n);
        set(&mut codes.trials, self.trials);
        set(&mut codes.target_d, self.target_d.map(|g| g.0));
        set(&mut codes.target_c, self.target_c);
        set(&mut codes.epsilon, self.epsilon);
        if self.profile.is_some() {
            codes.profile = self.profile;
        }
        set(&mut codes.source_code, self.source_code);
        if self.no_binning {
            codes.binning = false;
        }
        let mp = &mut codes.message_passing;
        set(&mut mp.max_iters, self.max_iters);
        set(&mut mp.damping_start, self.damping_start);
        set(&mut mp.damping, self.damping);
        set(&mut mp.decimation_threshold, self.decimation_threshold);

        cfg.validate()?;
        Ok(cfg)
    }
}
