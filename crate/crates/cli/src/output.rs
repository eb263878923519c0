//! CSV and JSON artifacts shared by every command.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "annspec-summary";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    ReportOnly,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::ReportOnly => "report-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion this check feeds, if any.
    pub criterion: Option<u8>,
    pub status: Status,
    /// `None` when the measured value is not finite.
    pub value: Option<f64>,
    pub bound: String,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Check {
    pub fn bound(name: impl Into<String>, criterion: Option<u8>, value: f64, ok: bool, bound: impl Into<String>) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { name: name.into(), criterion, status, value: finite(value), bound: bound.into() }
    }

    pub fn report(name: impl Into<String>, criterion: Option<u8>, value: f64) -> Self {
        Self { name: name.into(), criterion, status: Status::ReportOnly, value: finite(value), bound: String::new() }
    }
}

pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Text(String::new()), Cell::Num)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(x) if x.is_nan() => f.write_str("nan"),
            Cell::Num(x) if x.is_infinite() => f.write_str(if *x > 0.0 { "inf" } else { "-inf" }),
            Cell::Num(x) => write!(f, "{x:.16e}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Suggested axes for plotting a table; no rendering happens here.
pub struct Plot {
    pub x: &'static str,
    pub y: &'static str,
    pub scale: &'static str,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: Option<Plot>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new(), plot: None }
    }

    pub fn with_plot(mut self, x: &'static str, y: &'static str, scale: &'static str) -> Self {
        self.plot = Some(Plot { x, y, scale });
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a command hands back for writing.
pub struct Artifact {
    pub table: Table,
    pub results: Value,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    pub status: Status,
    pub config: Value,
    pub checks: Vec<Check>,
    pub results: Value,
    pub csv: String,
}

pub fn overall(checks: &[Check]) -> Status {
    if checks.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else if checks.iter().any(|c| c.status == Status::Pass) {
        Status::Pass
    } else {
        Status::ReportOnly
    }
}

pub fn render_csv(command: &str, config: &Value, table: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# annspec {} {command}", annspec::VERSION);
    let _ = writeln!(s, "# config: {config}");
    if let Some(p) = &table.plot {
        let _ = writeln!(s, "# plot: x={} y={} scale={}", p.x, p.y, p.scale);
    }
    let _ = writeln!(s, "{}", table.header.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`.
pub fn write(dir: &Path, stem: &str, command: &str, config: Value, artifact: Artifact) -> annspec::Result<Summary> {
    fs::create_dir_all(dir)?;
    let csv_name = format!("{stem}.csv");
    fs::write(dir.join(&csv_name), render_csv(command, &config, &artifact.table))?;
    let summary = Summary {
        schema: SCHEMA.into(),
        schema_version: SCHEMA_VERSION,
        library_version: annspec::VERSION.into(),
        command: command.into(),
        status: overall(&artifact.checks),
        config,
        checks: artifact.checks,
        results: artifact.results,
        csv: csv_name,
    };
    fs::write(dir.join(format!("{stem}.json")), to_json(&summary)?)?;
    Ok(summary)
}

pub fn to_json<T: Serialize>(value: &T) -> annspec::Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| annspec::Error::Internal(format!("JSON encoding: {e}")))
}
