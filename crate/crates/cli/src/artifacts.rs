//! On-disk layout: one JSON envelope per run plus headed CSV tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub config_hash: String,
    pub version: String,
    pub grid: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition.
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    pub fn at_least(name: &str, value: f64, min: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold: format!(">= {min}"),
            pass: value >= min,
        }
    }

    pub fn at_most(name: &str, value: f64, max: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold: format!("<= {max}"),
            pass: value <= max,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold: format!("in [{lo}, {hi}]"),
            pass: (lo..=hi).contains(&value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: String,
    pub equation: String,
    pub meta: Meta,
    pub plan: serde_json::Value,
    pub checks: Vec<Check>,
    pub result: serde_json::Value,
}

/// Creates (or, when forced, reuses) the run directory.
pub fn prepare_dir(dir: &Path, force: bool) -> CliResult<()> {
    if dir.exists() && !force {
        return Err(CliError::Exists(dir.to_path_buf()));
    }
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn write_json(dir: &Path, envelope: &Envelope) -> CliResult<PathBuf> {
    let path = dir.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(envelope)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

pub fn read_json(path: &Path) -> CliResult<Envelope> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// CSV whose first line is a `#` comment carrying the run metadata.
pub fn write_csv<R: Serialize>(dir: &Path, name: &str, meta: &Meta, rows: &[R]) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut file = fs::File::create(&path)?;
    writeln!(
        file,
        "# nlsmooth {} config_hash={} grid={}",
        meta.version,
        meta.config_hash,
        serde_json::to_string(&meta.grid)?
    )?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path)
}

/// Rows of a headed CSV file, comment line skipped.
pub fn read_csv_rows(path: &Path) -> CliResult<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    Ok(r.records().collect::<Result<_, _>>()?)
}
