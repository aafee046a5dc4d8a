//! The five subcommands. Each writes its tables under the configured output
//! directory and returns the paths it wrote.

use std::cell::RefCell;
use std::path::PathBuf;

use actionrd_codes::multiplex::{evaluate, trials_csv, Design};
use actionrd_core::solver::solve_for_target;
use actionrd_core::{analytic_rdc, d_max, evaluate_rdc, nonadaptive_curve, sweep, RdcProblem};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{append_rows, header, point_row, table, write_file, POINT_COLUMNS};

fn nonconverged(cfg: &RunConfig, what: &str, count: usize) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let msg = format!("{count} {what} did not converge");
    if cfg.allow_unconverged {
        warn!("{msg} (allowed)");
        Ok(())
    } else {
        Err(CliError::Nonconvergence(format!("{msg}; rerun with --allow-unconverged to accept")))
    }
}

/// Envelope-style table: one `d,c,rate` row per `(d, c)` on the grid,
/// `c`-major.
fn dc_rows(cfg: &RunConfig, rate: impl Fn(f64, f64) -> Result<f64> + Sync) -> Result<Vec<String>> {
    let cells: Vec<(f64, f64)> = cfg
        .grid
        .c_list
        .iter()
        .flat_map(|&c| cfg.grid.d_grid.iter().map(move |&d| (d, c)))
        .collect();
    cells
        .par_iter()
        .map(|&(d, c)| Ok(format!("{d},{c},{:.9}", rate(d, c)?)))
        .collect()
}

pub fn cmd_sweep(cfg: &RunConfig, nonadaptive: bool) -> Result<Vec<PathBuf>> {
    let scenario = cfg.scenario()?;
    let head = header(cfg, "sweep", &scenario.hash());
    let curve = sweep(&scenario, &cfg.grid.s_grid, &cfg.grid.m_grid, &cfg.solver)?;
    let mut written = vec![write_file(
        &cfg.output_dir,
        "sweep.csv",
        &table(&head, POINT_COLUMNS, curve.points.iter().map(point_row)),
    )?];
    let envelope = dc_rows(cfg, |d, c| Ok(evaluate_rdc(&curve, d, c)))?;
    written.push(write_file(&cfg.output_dir, "envelope.csv", &table(&head, "d,c,rate", envelope))?);
    let mut unconverged = curve.points.iter().filter(|p| !p.converged).count();
    if nonadaptive {
        let base = nonadaptive_curve(&scenario, &cfg.grid.s_grid, &cfg.solver)?;
        unconverged += base.branches.iter().flatten().filter(|p| !p.converged).count();
        let rows = dc_rows(cfg, |d, c| Ok(base.evaluate(d, c)))?;
        let head = header(cfg, "sweep --nonadaptive", &scenario.hash());
        written.push(write_file(&cfg.output_dir, "nonadaptive.csv", &table(&head, "d,c,rate", rows))?);
    }
    nonconverged(cfg, "sweep points", unconverged)?;
    Ok(written)
}

/// Solves one point, prints it and appends it to `points.csv`.
pub fn cmd_point(cfg: &RunConfig, s: f64, m: f64) -> Result<(String, PathBuf)> {
    let scenario = cfg.scenario()?;
    let point = actionrd_core::solve_point(&scenario, s, m, &cfg.solver)?;
    let row = point_row(&point);
    let head = header(cfg, "point", &scenario.hash());
    let path = append_rows(&cfg.output_dir, "points.csv", &head, POINT_COLUMNS, std::slice::from_ref(&row))?;
    nonconverged(cfg, "points", usize::from(!point.converged))?;
    Ok((row, path))
}

/// Closed-form reference for the erasure example; only valid for `p = 0`.
pub fn cmd_analytic(cfg: &RunConfig) -> Result<PathBuf> {
    if cfg.scenario.file.is_some() {
        return Err(CliError::Config("the analytic reference exists only for the built-in erasure scenario".into()));
    }
    let e = cfg.erasure();
    if e.p != 0.0 {
        return Err(CliError::Config(format!(
            "the analytic reference holds only for erasure probability p = 0 (got p = {})",
            e.p
        )));
    }
    let scenario = cfg.scenario()?;
    let rows = dc_rows(cfg, |d, c| Ok(analytic_rdc(d, c, e.k, e.q)?))?;
    write_file(
        &cfg.output_dir,
        "analytic.csv",
        &table(&header(cfg, "analytic", &scenario.hash()), "d,c,rate", rows),
    )
}

pub fn cmd_dmax(cfg: &RunConfig) -> Result<PathBuf> {
    let scenario = cfg.scenario()?;
    let rows = cfg
        .grid
        .c_list
        .iter()
        .map(|&c| Ok(format!("{c},{:.9}", d_max(&scenario, c)?)))
        .collect::<Result<Vec<_>>>()?;
    write_file(
        &cfg.output_dir,
        "dmax.csv",
        &table(&header(cfg, "dmax", &scenario.hash()), "c,d_max", rows),
    )
}

/// Outcome of one code design evaluated against the bound.
#[derive(Clone, Debug)]
pub struct CodesSummary {
    pub target_d: f64,
    pub target_c: f64,
    pub rate: f64,
    pub distortion: f64,
    pub cost: f64,
    pub action_tv: f64,
    pub failures: usize,
    pub completed: usize,
    /// `R` at the empirical `(D, C)`.
    pub bound: f64,
    pub converse_safe: bool,
}

impl CodesSummary {
    pub fn gap(&self) -> f64 {
        self.rate - self.bound
    }

    fn row(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{},{},{:.6},{:.6},{}",
            self.target_d,
            self.target_c,
            self.rate,
            self.distortion,
            self.cost,
            self.action_tv,
            self.failures,
            self.completed,
            self.bound,
            self.gap(),
            self.converse_safe
        )
    }
}

pub const SUMMARY_COLUMNS: &str =
    "target_d,target_c,rate,distortion,cost,action_tv,failures,completed,bound,gap,converse_safe";

/// Designs, simulates and checks one code per distortion target. Fails with
/// exit code 4 when an aggregated point beats the converse.
pub fn cmd_codes(cfg: &RunConfig) -> Result<(Vec<CodesSummary>, Vec<PathBuf>)> {
    let scenario = cfg.scenario()?;
    let options = cfg.design_options()?;
    let problem = RdcProblem::new(&scenario, cfg.solver.pruning, cfg.solver.strategy_cap)?;
    let head = header(cfg, "codes", &scenario.hash());
    let c = cfg.codes.target_c;
    let mut written = Vec::new();
    let mut summaries = Vec::new();
    for &d in &cfg.codes.target_d {
        info!("designing for (D, C) = ({d}, {c})");
        let design = Design::for_target(&problem, d, c, &cfg.solver, &options)?;
        let eval = evaluate(&design, cfg.codes.trials, cfg.seed)?;
        let agg = &eval.aggregate;
        let name = format!("codes_trials_d{d}_c{c}.csv");
        written.push(write_file(&cfg.output_dir, &name, &format!("{head}{}", trials_csv(&eval)))?);

        let bound = solve_for_target(&problem, agg.distortion, agg.cost, &cfg.solver)?.rate;
        let failed = RefCell::new(None);
        let safe = agg.converse_safe(|dd, cc| {
            solve_for_target(&problem, dd, cc, &cfg.solver)
                .map(|t| t.rate)
                .unwrap_or_else(|e| {
                    *failed.borrow_mut() = Some(e);
                    f64::INFINITY
                })
        });
        if let Some(e) = failed.into_inner() {
            return Err(e.into());
        }
        let summary = CodesSummary {
            target_d: d,
            target_c: c,
            rate: agg.rate,
            distortion: agg.distortion,
            cost: agg.cost,
            action_tv: agg.action_tv,
            failures: agg.failures,
            completed: agg.completed,
            bound,
            converse_safe: safe,
        };
        if summary.gap() > cfg.codes.gap_warning {
            warn!("rate gap {:.4} at D = {d} exceeds {}", summary.gap(), cfg.codes.gap_warning);
        }
        summaries.push(summary);
    }
    written.push(write_file(
        &cfg.output_dir,
        "codes_summary.csv",
        &table(&head, SUMMARY_COLUMNS, summaries.iter().map(CodesSummary::row)),
    )?);
    let bound_rows: Vec<String> = cfg
        .grid
        .d_grid
        .par_iter()
        .map(|&d| Ok(format!("{d},{c},{:.9}", solve_for_target(&problem, d, c, &cfg.solver)?.rate)))
        .collect::<Result<_>>()?;
    written.push(write_file(&cfg.output_dir, "codes_bound.csv", &table(&head, "d,c,rate", bound_rows))?);

    let violations: Vec<String> = summaries
        .iter()
        .filter(|s| !s.converse_safe)
        .map(|s| format!("D = {}: rate {:.4} below the bound", s.target_d, s.rate))
        .collect();
    if !violations.is_empty() {
        return Err(CliError::Check(format!("converse violated ({})", violations.join("; "))));
    }
    Ok((summaries, written))
}
