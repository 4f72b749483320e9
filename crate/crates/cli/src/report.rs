//! Check records, JSON reports and CSV tables.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// One verification outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check: String,
    /// Label of the formula or property being checked.
    pub paper_ref: String,
    pub value: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
    /// Module and operation that produced `value`.
    pub source: String,
}

impl CheckRecord {
    /// `|value - expected| <= tol`.
    pub fn close(check: impl Into<String>, paper_ref: &str, value: f64, expected: f64, tol: f64, source: &str) -> Self {
        Self {
            check: check.into(),
            paper_ref: paper_ref.into(),
            value,
            expected,
            tol,
            pass: (value - expected).abs() <= tol,
            source: source.into(),
        }
    }

    /// `value <= tol`, for error-like quantities.
    pub fn below(check: impl Into<String>, paper_ref: &str, value: f64, tol: f64, source: &str) -> Self {
        Self {
            check: check.into(),
            paper_ref: paper_ref.into(),
            value,
            expected: 0.0,
            tol,
            pass: value <= tol,
            source: source.into(),
        }
    }

    /// Boolean property; `value` is 1 when it holds.
    pub fn holds(check: impl Into<String>, paper_ref: &str, ok: bool, source: &str) -> Self {
        Self {
            check: check.into(),
            paper_ref: paper_ref.into(),
            value: if ok { 1.0 } else { 0.0 },
            expected: 1.0,
            tol: 0.0,
            pass: ok,
            source: source.into(),
        }
    }
}

/// Report emitted by every subcommand.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    pub data: Value,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// CSV float formatting that round-trips IEEE doubles.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(open_output(out)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_checks_csv(out: Option<&Path>, checks: &[CheckRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.check.clone(),
                c.paper_ref.clone(),
                fmt_f64(c.value),
                fmt_f64(c.expected),
                fmt_f64(c.tol),
                c.pass.to_string(),
                c.source.clone(),
            ]
        })
        .collect();
    write_csv(out, &["check", "paper_ref", "value", "expected", "tol", "pass", "source"], &rows)
}

/// `<out>.json` next to a CSV output.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
