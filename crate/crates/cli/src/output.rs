use std::io::Write;

use serde_json::{Map, Value};

use crate::args::Format;

/// Records to emit. `Many` prints one line per record in jsonl and one row
/// per record in csv.
pub enum Report {
    One(Value),
    Many(Vec<Value>),
}

impl Report {
    fn records(&self) -> Vec<&Value> {
        match self {
            Report::One(v) => vec![v],
            Report::Many(v) => v.iter().collect(),
        }
    }
}

pub fn render(report: &Report, format: Format) -> Result<String, String> {
    let mut out = String::new();
    match format {
        Format::Json => {
            let v = match report {
                Report::One(v) => v.clone(),
                Report::Many(v) => Value::Array(v.clone()),
            };
            out.push_str(&serde_json::to_string_pretty(&v).map_err(|e| e.to_string())?);
            out.push('\n');
        }
        Format::Jsonl => {
            for r in report.records() {
                out.push_str(&serde_json::to_string(r).map_err(|e| e.to_string())?);
                out.push('\n');
            }
        }
        Format::Csv => out = csv_table(&report.records())?,
    }
    Ok(out)
}

fn flatten(prefix: &str, v: &Value, row: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, row);
            }
        }
        other => {
            row.insert(prefix.to_string(), other.clone());
        }
    }
}

fn csv_table(records: &[&Value]) -> Result<String, String> {
    let rows: Vec<Map<String, Value>> = records
        .iter()
        .map(|r| {
            let mut row = Map::new();
            flatten("", r, &mut row);
            row
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        for k in row.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| e.to_string())?;
    for row in &rows {
        let cells: Vec<String> = header
            .iter()
            .map(|k| match row.get(k) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
            })
            .collect();
        w.write_record(&cells).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

pub fn emit(text: &str, out: Option<&std::path::Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
