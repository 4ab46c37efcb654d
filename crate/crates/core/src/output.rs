//! Tabular output: CSV with a config comment line, or JSON with a meta block.

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
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

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(format_f64(*v)),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar results and fits: a `results` object in JSON, comment lines in CSV.
    pub extra: Map<String, Value>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set_extra<T: Serialize>(&mut self, key: &str, value: T) {
        self.extra.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }
}

impl Table {
    /// Stores a float, as a string when it is not finite.
    pub fn set_num(&mut self, key: &str, value: f64) {
        self.extra.insert(key.to_string(), Cell::Num(value).json());
    }
}

/// Hex SHA-256 of the canonical JSON form of a config.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let text = serde_json::to_string(config).unwrap_or_default();
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn to_csv<C: Serialize>(table: &Table, config: &C) -> String {
    let mut out = String::new();
    out.push_str("# config: ");
    out.push_str(&serde_json::to_string(config).unwrap_or_default());
    out.push('\n');
    for (k, v) in &table.extra {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json<C: Serialize>(table: &Table, config: &C) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
        .collect();
    let mut doc = Map::new();
    doc.insert(
        "meta".into(),
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": config_hash(config),
            "config": config,
        }),
    );
    doc.insert("columns".into(), json!(table.columns));
    doc.insert("rows".into(), Value::Array(rows));
    if !table.extra.is_empty() {
        doc.insert("results".into(), Value::Object(table.extra.clone()));
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).unwrap_or_default();
    s.push('\n');
    s
}
