//! Output documents. JSON and CSV both carry the tool version and the fully
//! resolved run configuration so a file can be traced back to its run.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const TOOL: &str = "sepdist";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Tabular part of a result, used for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Everything a command produces.
pub struct Report {
    pub config: Value,
    pub result: Value,
    pub table: Table,
}

impl Report {
    pub fn new(
        config: impl Serialize,
        result: impl Serialize,
        table: Table,
    ) -> serde_json::Result<Self> {
        Ok(Report {
            config: serde_json::to_value(config)?,
            result: serde_json::to_value(result)?,
            table,
        })
    }

    pub fn render(&self, format: Format) -> serde_json::Result<String> {
        match format {
            Format::Json => {
                let doc = serde_json::json!({
                    "tool": TOOL,
                    "version": VERSION,
                    "config": self.config,
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&doc)?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut s = String::new();
                writeln!(s, "# {TOOL} {VERSION}").unwrap();
                writeln!(s, "# config: {}", serde_json::to_string(&self.config)?).unwrap();
                writeln!(s, "{}", self.table.columns.join(",")).unwrap();
                for row in &self.table.rows {
                    let cells: Vec<String> = row.iter().map(Cell::render).collect();
                    writeln!(s, "{}", cells.join(",")).unwrap();
                }
                Ok(s)
            }
        }
    }
}

/// Writes to `path`, or to standard output when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
