//! Report rendering: CSV with a reproducibility header, or JSON with the
//! same content as one document. Identical configuration must produce
//! byte-identical output, so every float goes through the shortest
//! round-trip formatter and JSON keys are emitted in sorted order.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// JSON value for a float; non-finite values become strings so the
/// document stays valid.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

/// One report: an ordered config echo, a fixed column set with rows, and
/// summary key/value pairs.
pub struct Report {
    pub command: &'static str,
    pub config: Vec<(&'static str, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<(&'static str, Value)>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut s = format!(
            "# hillgap {}\n# command: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command
        );
        for (k, v) in &self.config {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        for (k, v) in &self.summary {
            s.push_str(&format!("# {k} = {}\n", csv_cell(v)));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn render_json(&self) -> String {
        let mut config = Map::new();
        for (k, v) in &self.config {
            config.insert((*k).to_string(), json!(v));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, val) in self.columns.iter().zip(row.iter()) {
                    obj.insert((*col).to_string(), val.clone());
                }
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        doc.insert("command".into(), json!(self.command));
        doc.insert("config".into(), Value::Object(config));
        for (k, v) in &self.summary {
            doc.insert((*k).to_string(), v.clone());
        }
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("finite values only");
        s.push('\n');
        s
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Writes to the path, or to stdout when no path is given.
pub fn write_output(out: &Option<PathBuf>, content: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, content),
        None => io::stdout().write_all(content.as_bytes()),
    }
}
