//! Machine-readable experiment reports.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{ExperimentConfig, Format};
use crate::error::Result;

/// Version of `schema/report.schema.json` this binary emits.
pub const SCHEMA_VERSION: &str = "1.0";
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(cell))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One pass/fail flag. `value` is compared against `limit` by the stated
/// relation when both are present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub results: Map<String, Value>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// Writes the report to `out` (a directory) or stdout. JSON goes to
    /// `<command>.json`; CSV additionally writes `<command>-<table>.csv`.
    pub fn emit(&self, out: Option<&Path>, format: Format) -> Result<Vec<PathBuf>> {
        let json = serde_json::to_string_pretty(self)?;
        let Some(dir) = out else {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match format {
                Format::Json => writeln!(lock, "{json}")?,
                Format::Csv => {
                    for t in &self.tables {
                        writeln!(lock, "# {}", t.name)?;
                        t.write_csv(&mut lock)?;
                        writeln!(lock)?;
                    }
                }
            }
            return Ok(Vec::new());
        };
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join(format!("{}.json", self.command));
        std::fs::write(&path, json)?;
        written.push(path);
        if format == Format::Csv {
            for t in &self.tables {
                let path = dir.join(format!("{}-{}.csv", self.command, t.name));
                t.write_csv(std::fs::File::create(&path)?)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Accumulates results and checks while a command runs.
pub struct ReportBuilder {
    command: String,
    config: ExperimentConfig,
    results: Map<String, Value>,
    tables: Vec<Table>,
    checks: Vec<Check>,
    start: Instant,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl ReportBuilder {
    pub fn new(config: &ExperimentConfig) -> Self {
        ReportBuilder {
            command: config.command.name().into(),
            config: config.clone(),
            results: Map::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn result<T: Serialize>(&mut self, name: &str, value: &T) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.results.insert(name.into(), v);
        self
    }

    pub fn table(&mut self, table: Table) -> &mut Self {
        self.tables.push(table);
        self
    }

    pub fn flag(&mut self, name: &str, pass: bool, detail: Option<String>) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            pass,
            value: None,
            limit: None,
            relation: None,
            detail,
        });
        self
    }

    fn compare(&mut self, name: &str, value: f64, limit: f64, relation: &str, pass: bool) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            pass: pass && !value.is_nan(),
            value: finite(value),
            limit: finite(limit),
            relation: Some(relation.into()),
            detail: (!value.is_finite()).then(|| format!("value {value}")),
        });
        self
    }

    pub fn le(&mut self, name: &str, value: f64, limit: f64) -> &mut Self {
        self.compare(name, value, limit, "<=", value <= limit)
    }

    pub fn lt(&mut self, name: &str, value: f64, limit: f64) -> &mut Self {
        self.compare(name, value, limit, "<", value < limit)
    }

    pub fn ge(&mut self, name: &str, value: f64, limit: f64) -> &mut Self {
        self.compare(name, value, limit, ">=", value >= limit)
    }

    pub fn gt(&mut self, name: &str, value: f64, limit: f64) -> &mut Self {
        self.compare(name, value, limit, ">", value > limit)
    }

    pub fn eq(&mut self, name: &str, value: f64, expected: f64) -> &mut Self {
        self.compare(name, value, expected, "==", value == expected)
    }

    /// Records an error as a failed check instead of aborting.
    pub fn error(&mut self, name: &str, err: impl std::fmt::Display) -> &mut Self {
        self.flag(name, false, Some(err.to_string()))
    }

    pub fn finish(self) -> ExperimentReport {
        let pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        ExperimentReport {
            schema_version: SCHEMA_VERSION.into(),
            command: self.command,
            config: self.config,
            results: self.results,
            tables: self.tables,
            checks: self.checks,
            pass,
            wall_time_s: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// `Some(x)` as a number, `None` or non-finite as `null`.
pub fn num(x: impl Into<Option<f64>>) -> Value {
    x.into()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}
