use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::error::{CliError, CliResult};

/// Nested fields become dotted keys; array elements get their index.
fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, Value)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(&key(&i.to_string()), v, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

pub fn flatten(value: &Value) -> Vec<(String, Value)> {
    let mut out = Vec::new();
    flatten_into("", value, &mut out);
    out
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn to_value<T: Serialize>(value: &T) -> CliResult<Value> {
    serde_json::to_value(value).map_err(|e| CliError::Config(format!("serialize: {e}")))
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 cells"))
}

fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(header);
    for r in rows {
        s.push_str(&line(r));
    }
    s
}

/// One record: key/value lines as a table, a header plus one row as CSV.
pub fn render_record<T: Serialize>(value: &T, format: Format) -> CliResult<String> {
    let v = to_value(value)?;
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&v).expect("value serializes") + "\n"),
        Format::Csv => {
            let flat = flatten(&v);
            let header: Vec<String> = flat.iter().map(|(k, _)| k.clone()).collect();
            let row: Vec<String> = flat.iter().map(|(_, v)| cell(v)).collect();
            csv_text(&header, &[row])
        }
        Format::Table => {
            let width = flatten(&v).iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            Ok(flatten(&v)
                .iter()
                .map(|(k, val)| {
                    let c = cell(val);
                    format!("{k:<width$}  {}\n", if c.is_empty() { "-" } else { &c })
                })
                .collect())
        }
    }
}

/// Many records with the same fields: one row each.
pub fn render_rows<T: Serialize>(rows: &[T], format: Format) -> CliResult<String> {
    if format == Format::Json {
        let v = to_value(&rows)?;
        return Ok(serde_json::to_string_pretty(&v).expect("value serializes") + "\n");
    }
    let flat: Vec<Vec<(String, Value)>> = rows.iter().map(|r| to_value(r).map(|v| flatten(&v))).collect::<CliResult<_>>()?;
    let header: Vec<String> = flat
        .first()
        .map(|r| r.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    let cells: Vec<Vec<String>> = flat.iter().map(|r| r.iter().map(|(_, v)| cell(v)).collect()).collect();
    match format {
        Format::Csv => csv_text(&header, &cells),
        _ => Ok(aligned(&header, &cells)),
    }
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(CliError::io(path))
}

/// Write to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(CliError::io(Path::new("<stdout>")))
        }
    }
}
