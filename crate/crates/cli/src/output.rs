//! Tables and their CSV / JSON encodings.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Sample time, printed with 12 decimals.
    Time(f64),
    /// Printed by [`format_value`].
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Time(t) => format!("{t:.12}"),
            Cell::Num(v) => format_value(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json_value(&self) -> Value {
        match self {
            Cell::Time(t) => json!(format!("{t:.12}").parse::<f64>().unwrap_or(*t)),
            Cell::Num(v) => json!(format_value(*v).parse::<f64>().unwrap_or(*v)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Twelve decimals with trailing zeros dropped; `-0` prints as `0`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.12}");
    let out = trim_fraction(&s);
    if out == "-0" {
        "0".into()
    } else {
        out.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json_value).collect())).collect();
        json!({ "columns": self.columns, "rows": rows })
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut bytes = serde_json::to_vec_pretty(&self.to_json())?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

/// Writes every file or none: each goes to a temporary name first and is
/// renamed once all have been written.
pub fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut staged = Vec::new();
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = std::fs::write(&tmp, bytes) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            let _ = std::fs::remove_file(&tmp);
            return Err(e.into());
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut done = Vec::new();
    for (tmp, dest) in staged {
        std::fs::rename(&tmp, &dest)?;
        done.push(dest);
    }
    Ok(done)
}
