//! Column tables written as CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Column {
    Num(Vec<f64>),
    Text(Vec<String>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Num(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            Column::Num(v) => format!("{:.16e}", v[row]),
            Column::Text(v) => v[row].clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            // NaN and infinities become null.
            Column::Num(v) => Value::Array(v.iter().map(|&x| serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)).collect()),
            Column::Text(v) => Value::Array(v.iter().cloned().map(Value::String).collect()),
        }
    }
}

/// Named columns of equal length.
#[derive(Debug, Clone, Default)]
pub struct Table {
    columns: Vec<(String, Column)>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, name: &str, values: Vec<f64>) -> Self {
        self.columns.push((name.to_string(), Column::Num(values)));
        self
    }

    pub fn text(mut self, name: &str, values: Vec<String>) -> Self {
        self.columns.push((name.to_string(), Column::Text(values)));
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, c)| c.len())
    }

    pub fn render(&self, format: Format, meta: &Value) -> String {
        debug_assert!(self.columns.iter().all(|(_, c)| c.len() == self.rows()));
        match format {
            Format::Csv => {
                let mut out = self.columns.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(",");
                out.push('\n');
                for row in 0..self.rows() {
                    let cells: Vec<String> = self.columns.iter().map(|(_, c)| c.cell(row)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("meta".into(), meta.clone());
                for (name, col) in &self.columns {
                    obj.insert(name.clone(), col.to_json());
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("tables serialise");
                s.push('\n');
                s
            }
        }
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            let mut w = BufWriter::new(f);
            w.write_all(text.as_bytes()).and_then(|_| w.flush()).with_context(|| format!("cannot write {}", p.display()))
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).context("cannot write to stdout")
        }
    }
}
