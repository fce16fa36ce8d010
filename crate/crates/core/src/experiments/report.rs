//! Scenario reports and their JSON/CSV forms.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::bunching::FiberBunchingReport;
use crate::error::{Error, Result};

/// A table cell. Non-finite numbers are stored as text so that the JSON
/// form round-trips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn num(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Num(x)
        } else if x.is_nan() {
            Cell::Text("nan".into())
        } else if x > 0.0 {
            Cell::Text("inf".into())
        } else {
            Cell::Text("-inf".into())
        }
    }

    pub fn int(x: impl TryInto<i64>) -> Cell {
        Cell::Int(x.try_into().unwrap_or(i64::MAX))
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            Cell::Text(t) => match t.as_str() {
                "inf" => Some(f64::INFINITY),
                "-inf" => Some(f64::NEG_INFINITY),
                "nan" => Some(f64::NAN),
                _ => None,
            },
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:e}"),
            Cell::Text(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// A pass/fail claim with the numbers, sample size and tolerance behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub measured: Cell,
    pub bound: Cell,
    pub samples: usize,
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    /// Passes when `measured ≤ bound`.
    pub fn at_most(name: &str, measured: f64, bound: f64, samples: usize, tolerance: f64, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            passed: measured <= bound,
            measured: Cell::num(measured),
            bound: Cell::num(bound),
            samples,
            tolerance,
            detail: detail.into(),
        }
    }

    /// Passes when `measured ≥ bound`.
    pub fn at_least(name: &str, measured: f64, bound: f64, samples: usize, tolerance: f64, detail: impl Into<String>) -> Self {
        Verdict { passed: measured >= bound, ..Self::at_most(name, measured, bound, samples, tolerance, detail) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledBunching {
    pub label: String,
    pub report: FiberBunchingReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub passed: bool,
    pub bunching: Vec<LabeledBunching>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub config: ExperimentConfig,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Report {
            scenario: config.scenario.as_str().into(),
            seed: config.seed,
            passed: true,
            bunching: Vec::new(),
            tables: Vec::new(),
            verdicts: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.passed &= v.passed;
        self.verdicts.push(v);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn find_verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn new(reports: Vec<Report>) -> Self {
        SuiteReport { passed: reports.iter().all(|r| r.passed), reports }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Table as CSV text with a header row.
pub fn table_csv(table: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn verdicts_table(reports: &[&Report]) -> Table {
    let mut t = Table::new("verdicts", &["scenario", "name", "passed", "measured", "bound", "samples", "tolerance", "detail"]);
    for r in reports {
        for v in &r.verdicts {
            t.push(vec![
                Cell::text(&r.scenario),
                Cell::text(&v.name),
                Cell::text(if v.passed { "PASS" } else { "FAIL" }),
                v.measured.clone(),
                v.bound.clone(),
                Cell::int(v.samples),
                Cell::num(v.tolerance),
                Cell::text(&v.detail),
            ]);
        }
    }
    t
}

/// Writes `reports` to `out`: a JSON file (or a directory receiving
/// `report.json`) for [`Format::Json`], a directory with one CSV per table
/// plus `verdicts.csv` for [`Format::Csv`]. With several reports the CSV
/// names are prefixed by the report index and scenario. Without `out` the
/// JSON goes to standard output.
pub fn emit(reports: &[Report], format: Format, out: Option<&Path>) -> Result<()> {
    let json = if reports.len() == 1 { reports[0].to_json() } else { SuiteReport::new(reports.to_vec()).to_json() };
    match (format, out) {
        (Format::Json, None) => {
            println!("{json}");
            Ok(())
        }
        (Format::Json, Some(path)) => {
            let target = if path.is_dir() { path.join("report.json") } else { path.to_path_buf() };
            if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(target, json + "\n")?;
            Ok(())
        }
        (Format::Csv, out) => {
            let dir = out.ok_or_else(|| Error::ConfigInvalid("csv output needs --out <directory>".into()))?;
            fs::create_dir_all(dir)?;
            let multi = reports.len() > 1;
            for (i, r) in reports.iter().enumerate() {
                for t in &r.tables {
                    let name = if multi { format!("{i:02}_{}.{}.csv", r.scenario, t.name) } else { format!("{}.csv", t.name) };
                    fs::write(dir.join(name), table_csv(t)?)?;
                }
            }
            let refs: Vec<&Report> = reports.iter().collect();
            fs::write(dir.join("verdicts.csv"), table_csv(&verdicts_table(&refs))?)?;
            Ok(())
        }
    }
}
