//! Tabular results and their CSV/JSON forms.

use crate::error::CliResult;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sonolink::units::sci;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sci(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
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

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (h, c) in self.header.iter().zip(r) {
                    m.insert(h.clone(), c.json());
                }
                Value::Object(m)
            })
            .collect();
        json!({ "name": self.name, "columns": self.header, "rows": rows })
    }
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Output {
    /// Resolved inputs; hashed into the config hash.
    pub inputs: Value,
    pub tables: Vec<Table>,
    /// Extra JSON sections (link budgets, safety reports, summaries).
    pub sections: Map<String, Value>,
    pub notes: Vec<String>,
    /// A non-informational safety check failed.
    pub safety_failed: bool,
    /// The inputs themselves ask for safety failures to be fatal.
    pub enforce_safety: bool,
}

impl Output {
    pub fn new(inputs: Value) -> Self {
        Self { inputs, ..Default::default() }
    }

    /// SHA-256 of the command name and its resolved inputs.
    pub fn config_hash(&self, command: &str) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(&json!({ "command": command, "inputs": self.inputs }))
            .expect("inputs serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn section(&mut self, key: &str, value: impl Serialize) {
        self.sections.insert(key.to_string(), serde_json::to_value(value).expect("report serializes"));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn report(&self, meta: &Meta) -> Value {
        json!({
            "tool": "sonolink",
            "version": env!("CARGO_PKG_VERSION"),
            "command": meta.command,
            "config_hash": meta.config_hash,
            "runtime_s": meta.runtime_s,
            "inputs": self.inputs,
            "tables": self.tables.iter().map(Table::to_json).collect::<Vec<_>>(),
            "results": Value::Object(self.sections.clone()),
            "notes": self.notes,
        })
    }

    /// CSV tables for standard output, separated by `# name` lines when
    /// there is more than one.
    pub fn stdout_csv(&self) -> String {
        if self.tables.len() == 1 {
            return self.tables[0].to_csv();
        }
        self.tables
            .iter()
            .map(|t| format!("# {}\n{}", t.name, t.to_csv()))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Write `<name>.csv` per table and `report.json` into `dir`.
    pub fn write_dir(&self, dir: &Path, meta: &Meta) -> CliResult<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv())?;
        }
        let text = serde_json::to_string_pretty(&self.report(meta)).expect("report serializes");
        std::fs::write(dir.join("report.json"), text + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Meta {
    pub command: String,
    pub config_hash: String,
    pub runtime_s: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_nine_significant_digits() {
        let mut t = Table::new("t", &["a", "b", "kind"]);
        t.push(vec![1.0.into(), (1.0 / 3.0).into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b,kind\n1.00000000e0,3.33333333e-1,\"x,y\"\n");
        let j = t.to_json();
        assert_eq!(j["rows"][0]["kind"], "x,y");
    }
}
