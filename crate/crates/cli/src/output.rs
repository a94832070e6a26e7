//! Output writers: CSV tables with provenance comment headers, or the same
//! tables as JSON documents with an embedded provenance object. Floats are
//! written in shortest round-trip form, so identical runs produce identical
//! bytes.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Enough context to reproduce an output file exactly.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub scenario: String,
}

impl Provenance {
    pub fn new(command: &str, config_digest: &str, scenario: &str) -> Self {
        Self {
            tool: "photon-pair",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_sha256: config_digest.to_string(),
            scenario: scenario.to_string(),
        }
    }

    fn csv_header(&self) -> String {
        format!(
            "# tool: {} {}\n# command: {}\n# config_sha256: {}\n# scenario: {}\n",
            self.tool, self.version, self.command, self.config_sha256, self.scenario
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A rectangular table of mixed numeric/text cells.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::json!(v),
            Cell::Float(v) if v.is_finite() => serde_json::json!(v),
            Cell::Float(v) => serde_json::json!(v.to_string()),
            Cell::Text(s) => serde_json::json!(s),
        }
    }
}

/// Shortest round-trip decimal form.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        v.to_string()
    }
}

/// Write a table as `<stem>.csv` or `<stem>.json` depending on the format.
pub fn write_table(
    out_dir: &Path,
    stem: &str,
    table: &Table,
    provenance: &Provenance,
    format: OutputFormat,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", out_dir.display())))?;
    match format {
        OutputFormat::Csv => {
            let path = out_dir.join(format!("{stem}.csv"));
            let mut text = provenance.csv_header();
            writeln!(text, "{}", table.columns.join(",")).unwrap();
            for row in &table.rows {
                let line: Vec<String> = row.iter().map(Cell::csv).collect();
                writeln!(text, "{}", line.join(",")).unwrap();
            }
            std::fs::write(&path, text)
                .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = out_dir.join(format!("{stem}.json"));
            let rows: Vec<Vec<serde_json::Value>> = table
                .rows
                .iter()
                .map(|row| row.iter().map(Cell::json).collect())
                .collect();
            let doc = serde_json::json!({
                "provenance": provenance,
                "columns": table.columns,
                "rows": rows,
            });
            write_json_value(&path, &doc)?;
            Ok(path)
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let doc = serde_json::to_value(value)
        .map_err(|e| CliError::io(format!("serialization error: {e}")))?;
    write_json_value(path, &doc)
}

fn write_json_value(path: &Path, doc: &serde_json::Value) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", parent.display())))?;
    }
    let text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::io(format!("serialization error: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}
