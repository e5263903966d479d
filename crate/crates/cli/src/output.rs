use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Shortest round-trip form, switching to exponent notation far from 1.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// One output artifact: a header of configuration comments, a table and a
/// closing summary.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub reproduces: String,
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn new(command: &str, reproduces: &str, columns: &[&str]) -> Self {
        Report {
            command: command.to_string(),
            reproduces: reproduces.to_string(),
            config: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn summary(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.push((key.to_string(), value.into()));
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        writeln!(out, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(out, "# command: {}", self.command).unwrap();
        for (k, v) in &self.config {
            writeln!(out, "# config: {k}={v}").unwrap();
        }
        writeln!(out, "# reproduces: {}", self.reproduces).unwrap();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv))?;
        }
        let body = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        for (k, v) in &self.summary {
            writeln!(out, "# summary: {k}={}", v.csv()).unwrap();
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let config: Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let summary: Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), v.json()))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.clone(), v.json()))
                        .collect(),
                )
            })
            .collect();
        let doc = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": config,
            "reproduces": self.reproduces,
            "columns": self.columns,
            "rows": rows,
            "summary": summary,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let text = self.render(format)?;
        match out {
            Some(path) => fs::write(path, text).map_err(|e| CliError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            }),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io {
                    path: "<stdout>".into(),
                    reason: e.to_string(),
                }),
        }
    }
}
