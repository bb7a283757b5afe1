//! Tabular reports with a metadata block, rendered as JSON or CSV.
//!
//! Output is byte-for-byte deterministic: metadata and columns keep their
//! insertion order and floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::{format_float, io_error};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!(
                "unknown report format {other:?} (expected json or csv)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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
        v.map_or(Cell::Null, Into::into)
    }
}

impl Cell {
    fn json(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => format_float(*x),
            Cell::Float(_) | Cell::Null => "null".to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => json_string(s),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => csv_escape(s),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A metadata block plus a table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            metadata: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match columns"
        );
        self.rows.push(row);
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.render_json(),
            ReportFormat::Csv => self.render_csv(),
        }
    }

    fn render_json(&self) -> String {
        let mut out = String::from("{\n  \"metadata\": {");
        for (i, (k, v)) in self.metadata.iter().enumerate() {
            let sep = if i == 0 { "\n" } else { ",\n" };
            let _ = write!(out, "{sep}    {}: {}", json_string(k), json_string(v));
        }
        out.push_str(if self.metadata.is_empty() {
            "},\n"
        } else {
            "\n  },\n"
        });
        out.push_str("  \"columns\": [");
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| json_string(c))
                .collect::<Vec<_>>()
                .join(", "),
        );
        out.push_str("],\n  \"rows\": [");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n    {" } else { ",\n    {" });
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| format!("{}: {}", json_string(c), v.json()))
                .collect();
            out.push_str(&fields.join(", "));
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() {
            "]\n}\n"
        } else {
            "\n  ]\n}\n"
        });
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {}", v.replace(['\n', '\r'], " "));
        }
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| csv_escape(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<()> {
    std::fs::write(path, report.render(format)).map_err(io_error(path))
}
