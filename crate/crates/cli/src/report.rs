//! Report assembly and output. CSV reports start with `# key: value` header
//! lines; JSON reports carry the same header as an object.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};
use tnlab::error::Status;
use tnlab::limits::limits;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Str(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => serde_json::to_string(x).expect("finite"),
            Cell::Float(x) => non_finite(*x).to_string(),
            Cell::Str(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => float(*x),
            Cell::Str(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

fn non_finite(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// Finite floats as numbers, others as the strings `inf`, `-inf`, `nan`.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(non_finite(x))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
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
        Cell::Str(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl From<Status> for Cell {
    fn from(v: Status) -> Self {
        Cell::Str(v.as_str().to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    Table { columns: Vec<&'static str>, rows: Vec<Vec<Cell>> },
    Document(Value),
}

#[derive(Debug)]
pub struct Report {
    pub subcommand: String,
    pub config: Value,
    pub seed: u64,
    pub body: Body,
    /// Any row with status `error` makes the run exit with code 2.
    pub has_error: bool,
    started: Instant,
}

impl Report {
    pub fn table(subcommand: &str, config: Value, seed: u64, columns: Vec<&'static str>) -> Self {
        Report {
            subcommand: subcommand.into(),
            config,
            seed,
            body: Body::Table { columns, rows: Vec::new() },
            has_error: false,
            started: Instant::now(),
        }
    }

    pub fn document(subcommand: &str, config: Value, seed: u64, body: Value, has_error: bool) -> Self {
        Report {
            subcommand: subcommand.into(),
            config,
            seed,
            body: Body::Document(body),
            has_error,
            started: Instant::now(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>, status: Status) {
        if let Body::Table { columns, rows } = &mut self.body {
            debug_assert_eq!(row.len(), columns.len());
            rows.push(row);
        }
        self.has_error |= status == Status::Error;
    }

    fn header(&self) -> Vec<(String, Value)> {
        let l = limits();
        vec![
            ("tool".into(), json!(format!("tnlab {}", env!("CARGO_PKG_VERSION")))),
            ("subcommand".into(), json!(self.subcommand)),
            ("config".into(), self.config.clone()),
            ("seed".into(), json!(self.seed)),
            (
                "caps".into(),
                json!({
                    "max_state": l.max_state.to_string(),
                    "max_region": l.max_region.to_string(),
                    "max_hilbert": l.max_hilbert.to_string(),
                    "max_tensor": l.max_tensor.to_string(),
                    "max_mpo_site": l.max_mpo_site.to_string(),
                    "dense_eig": l.dense_eig,
                }),
            ),
            ("wall_time_s".into(), json!(self.started.elapsed().as_secs_f64())),
        ]
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match (format, &self.body) {
            (Format::Csv, Body::Table { columns, rows }) => {
                let mut out = String::new();
                for (k, v) in self.header() {
                    let v = match v {
                        Value::String(s) => s,
                        other => other.to_string(),
                    };
                    out.push_str(&format!("# {k}: {v}\n"));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(columns).map_err(|e| CliError::Io(e.to_string()))?;
                for row in rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(|e| CliError::Io(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
                out.push_str(&String::from_utf8(bytes).expect("utf-8"));
                Ok(out)
            }
            (Format::Csv, Body::Document(_)) => {
                Err(CliError::Usage(format!("`{}` writes JSON only; use --format json", self.subcommand)))
            }
            (Format::Json, body) => {
                let header: Map<String, Value> = self.header().into_iter().collect();
                let body = match body {
                    Body::Table { columns, rows } => {
                        let rows: Vec<Value> = rows
                            .iter()
                            .map(|r| Value::Object(columns.iter().map(|c| c.to_string()).zip(r.iter().map(Cell::json)).collect()))
                            .collect();
                        json!({ "columns": columns, "rows": rows })
                    }
                    Body::Document(v) => v.clone(),
                };
                let doc = json!({ "header": header, "body": body });
                Ok(serde_json::to_string_pretty(&doc).expect("plain data") + "\n")
            }
        }
    }
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
