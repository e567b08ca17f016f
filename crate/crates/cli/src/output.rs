//! CSV/JSON artifacts with a metadata header, written atomically.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::{Format, RunSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tabular command output.
#[derive(Debug, Clone, Default)]
pub struct Artifact {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub seeds: Vec<u64>,
    pub aggregates: Option<Value>,
    /// Replaces the CSV body (header and rows) when set.
    pub csv_body: Option<String>,
}

impl Artifact {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Artifact {
            columns,
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn meta(spec: &RunSpec, art: &Artifact) -> Value {
    let config: Map<String, Value> = spec
        .resolved
        .entries()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    json!({
        "tool": "geonoise",
        "version": VERSION,
        "command": spec.command.name(),
        "config_hash": spec.resolved.hash(),
        "seeds": art.seeds,
        "config": config,
    })
}

pub fn render(spec: &RunSpec, art: &Artifact) -> String {
    match spec.format {
        Format::Csv => render_csv(spec, art),
        Format::Json => render_json(spec, art),
    }
}

fn render_csv(spec: &RunSpec, art: &Artifact) -> String {
    let mut out = String::new();
    out.push_str(&format!("# geonoise {VERSION}\n"));
    out.push_str(&format!("# command: {}\n", spec.command.name()));
    out.push_str(&format!("# config_hash: {}\n", spec.resolved.hash()));
    let seeds: Vec<String> = art.seeds.iter().map(u64::to_string).collect();
    out.push_str(&format!("# seeds: {}\n", seeds.join(" ")));
    for (k, v) in spec.resolved.entries() {
        out.push_str(&format!("# config {k} = {v}\n"));
    }
    match &art.csv_body {
        Some(body) => out.push_str(body),
        None => {
            out.push_str(&art.columns.join(","));
            out.push('\n');
            for row in &art.rows {
                let cells: Vec<String> = row.iter().map(cell).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
    }
    out
}

fn render_json(spec: &RunSpec, art: &Artifact) -> String {
    let records: Vec<Value> = art
        .rows
        .iter()
        .map(|row| {
            Value::Object(
                art.columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.clone()))
                    .collect(),
            )
        })
        .collect();
    let mut top = Map::new();
    top.insert("meta".into(), meta(spec, art));
    top.insert("records".into(), Value::Array(records));
    if let Some(a) = &art.aggregates {
        top.insert("aggregates".into(), a.clone());
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("JSON values always serialise");
    s.push('\n');
    s
}

/// Writes `text` to `out`; `-` is standard output. Files are written to a
/// temporary sibling and renamed into place.
pub fn write_atomic(out: &str, text: &str) -> std::io::Result<()> {
    if out == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        return stdout.flush();
    }
    let path = Path::new(out);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
