//! JSON and CSV emission with a fixed numeric precision.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rounds `x` to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Rounds every float in `v` in place; integers are left alone.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round12(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// A rounded document: scalar fields plus one table.
///
/// JSON keeps the structure of `doc`. CSV writes every non-table scalar as a
/// `# key=value` line, then the table with a header row.
pub struct Document {
    doc: Value,
    table: Table,
}

pub enum Table {
    /// `doc[key]` is an array of flat objects.
    Rows(&'static str),
    /// Every array in `doc` has one entry per slot; they are zipped into rows.
    PerSlot,
}

impl Document {
    pub fn new(mut doc: Value, table: Table) -> Self {
        round_value(&mut doc);
        Document { doc, table }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.doc)
                    .map_err(|e| CliError::Invalid(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self.to_csv(),
        }
    }

    fn to_csv(&self) -> Result<String, CliError> {
        let mut meta = Vec::new();
        let mut columns: Vec<(String, Vec<Value>)> = Vec::new();
        let Value::Object(root) = &self.doc else {
            return Err(CliError::Invalid("document is not an object".into()));
        };
        collect(root, "", &mut meta, &mut columns);
        let (header, rows) = match self.table {
            Table::Rows(key) => {
                let mut items = Vec::new();
                for (name, values) in columns {
                    if name == key {
                        items = values;
                    } else {
                        meta.push((name, Value::Array(values).to_string()));
                    }
                }
                let mut header: Vec<String> = Vec::new();
                let mut rows = Vec::new();
                for item in &items {
                    let mut flat = Vec::new();
                    flatten(item, "", &mut flat);
                    if header.is_empty() {
                        header = flat.iter().map(|(k, _)| k.clone()).collect();
                    }
                    rows.push(flat.into_iter().map(|(_, v)| cell(&v)).collect::<Vec<_>>());
                }
                (header, rows)
            }
            Table::PerSlot => {
                let len = columns.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
                let mut header = vec!["slot".to_string()];
                let mut cols: Vec<Vec<String>> = Vec::new();
                for (name, items) in &columns {
                    let mut sub: Vec<(String, Vec<String>)> = Vec::new();
                    for (i, item) in items.iter().enumerate() {
                        let mut flat = Vec::new();
                        flatten(item, "", &mut flat);
                        for (k, v) in flat {
                            let col = if k.is_empty() {
                                name.clone()
                            } else {
                                format!("{name}.{k}")
                            };
                            match sub.iter_mut().find(|(c, _)| *c == col) {
                                Some((_, vals)) => vals[i] = cell(&v),
                                None => {
                                    let mut vals = vec![String::new(); len];
                                    vals[i] = cell(&v);
                                    sub.push((col, vals));
                                }
                            }
                        }
                    }
                    for (col, vals) in sub {
                        header.push(col);
                        cols.push(vals);
                    }
                }
                let rows = (0..len)
                    .map(|i| {
                        let mut row = vec![i.to_string()];
                        row.extend(cols.iter().map(|c| c[i].clone()));
                        row
                    })
                    .collect();
                (header, rows)
            }
        };

        let mut out = Vec::new();
        for (k, v) in &meta {
            writeln!(out, "# {k}={v}").expect("write to memory");
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&header).map_err(csv_err)?;
            for row in &rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush().map_err(|e| CliError::Invalid(e.to_string()))?;
        }
        String::from_utf8(out).map_err(|e| CliError::Invalid(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Invalid(e.to_string())
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn collect(
    map: &Map<String, Value>,
    prefix: &str,
    meta: &mut Vec<(String, String)>,
    cols: &mut Vec<(String, Vec<Value>)>,
) {
    for (k, v) in map {
        let key = join(prefix, k);
        match v {
            Value::Object(inner) => collect(inner, &key, meta, cols),
            Value::Array(items) => cols.push((key, items.clone())),
            other => meta.push((key, cell(other))),
        }
    }
}

fn flatten(v: &Value, prefix: &str, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                flatten(inner, &join(prefix, k), out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

/// Text of a scalar as it appears in the JSON output.
fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Invalid(e.to_string()))
        }
    }
}
