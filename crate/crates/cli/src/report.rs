//! Consolidated pass/warn summary over a tree of run directories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::artifacts::{self, Envelope};
use crate::error::{CliError, CliResult};

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub run: String,
    pub kind: String,
    pub equation: String,
    pub check: String,
    pub value: f64,
    pub threshold: String,
    pub status: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.status == "pass")
    }

    pub fn render(&self) -> String {
        let headers = ["run", "kind", "equation", "check", "value", "threshold", "status"];
        let cells: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.run.clone(),
                    r.kind.clone(),
                    r.equation.clone(),
                    r.check.clone(),
                    format!("{:.4}", r.value),
                    r.threshold.clone(),
                    r.status.to_string(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |items: Vec<&str>| {
            items
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(headers.to_vec());
        out.push('\n');
        for row in &cells {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        out
    }
}

fn collect_reports(dir: &Path, found: &mut Vec<PathBuf>) -> CliResult<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_reports(&path, found)?;
        } else if path.file_name().is_some_and(|n| n == artifacts::REPORT_FILE) {
            found.push(path);
        }
    }
    Ok(())
}

fn rows_of(root: &Path, path: &Path, env: &Envelope) -> Vec<SummaryRow> {
    let run = path
        .parent()
        .and_then(|p| p.strip_prefix(root).ok())
        .map(|p| p.display().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| ".".into());
    if env.checks.is_empty() {
        return vec![SummaryRow {
            run,
            kind: env.kind.clone(),
            equation: env.equation.clone(),
            check: "-".into(),
            value: 0.0,
            threshold: "-".into(),
            status: "pass",
        }];
    }
    env.checks
        .iter()
        .map(|c| SummaryRow {
            run: run.clone(),
            kind: env.kind.clone(),
            equation: env.equation.clone(),
            check: c.name.clone(),
            value: c.value,
            threshold: c.threshold.clone(),
            status: if c.pass { "pass" } else { "warn" },
        })
        .collect()
}

/// Reads every report under `dir` and writes `summary.csv` next to them.
pub fn summarize(dir: &Path) -> CliResult<Summary> {
    if !dir.is_dir() {
        return Err(CliError::NoReports(dir.to_path_buf()));
    }
    let mut found = Vec::new();
    collect_reports(dir, &mut found)?;
    if found.is_empty() {
        return Err(CliError::NoReports(dir.to_path_buf()));
    }
    let mut rows = Vec::new();
    for path in &found {
        let env = artifacts::read_json(path)?;
        rows.extend(rows_of(dir, path, &env));
    }
    let mut w = csv::Writer::from_path(dir.join(SUMMARY_FILE))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(Summary { rows })
}
