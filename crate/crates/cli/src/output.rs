//! CSV files with a `#` comment header identifying the run.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use actionrd_core::RdcPoint;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column schema shared by `sweep` and `point`.
pub const POINT_COLUMNS: &str = "s,m,rate,distortion,cost,converged,iters";

pub fn header(cfg: &RunConfig, command: &str, scenario_hash: &str) -> String {
    format!(
        "# actionrd {VERSION}\n# command: {command}\n# config: {}\n# seed: {}\n# scenario: {scenario_hash}\n",
        cfg.hash(),
        cfg.seed
    )
}

pub fn point_row(p: &RdcPoint) -> String {
    format!(
        "{},{},{:.9},{:.9},{:.9},{},{}",
        p.s, p.m, p.rate, p.distortion, p.cost, p.converged, p.iterations
    )
}

/// `header`, then the column line, then `rows`.
pub fn table(header: &str, columns: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push_str(columns);
    out.push('\n');
    for row in rows {
        writeln!(out, "{row}").unwrap();
    }
    out
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

/// Appends `rows` to `dir/name`, writing `header` and `columns` first when
/// the file is new.
pub fn append_rows(dir: &Path, name: &str, header: &str, columns: &str, rows: &[String]) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let fresh = !path.exists();
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| CliError::io(&path, e))?;
    let mut text = String::new();
    if fresh {
        text.push_str(header);
        text.push_str(columns);
        text.push('\n');
    }
    for row in rows {
        writeln!(text, "{row}").unwrap();
    }
    file.write_all(text.as_bytes()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
