use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::config::{ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};

/// One asserted inequality `lhs <= rhs` (or `<`), with `margin = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl Margin {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Margin {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: lhs <= rhs,
        }
    }

    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Margin {
            holds: lhs < rhs,
            ..Margin::le(name, lhs, rhs)
        }
    }

    /// `lhs < rhs` where the gap is known separately, more precisely than
    /// `rhs - lhs` can represent.
    pub fn lt_with_gap(name: impl Into<String>, lhs: f64, rhs: f64, gap: f64) -> Self {
        Margin {
            name: name.into(),
            lhs,
            rhs,
            margin: gap,
            holds: gap > 0.0 && lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: Value,
    pub rows: Vec<Value>,
    pub pass: bool,
    pub margins: Vec<Margin>,
    /// Facts reported without being asserted.
    pub notes: Vec<String>,
    pub version: String,
    pub wall_clock: f64,
}

impl ExperimentReport {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        ExperimentReport {
            experiment: cfg.experiment.name().to_string(),
            params: serde_json::to_value(cfg).expect("config serialises"),
            rows: Vec::new(),
            pass: true,
            margins: Vec::new(),
            notes: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock: 0.0,
        }
    }

    pub fn push_row(&mut self, row: impl Serialize) {
        self.rows
            .push(serde_json::to_value(row).expect("row serialises"));
    }

    pub fn assert(&mut self, m: Margin) {
        self.pass &= m.holds;
        self.margins.push(m);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn margin(&self, name: &str) -> Option<&Margin> {
        self.margins.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    /// Rows flattened to dotted keys, one CSV line per row.
    pub fn to_csv(&self) -> Result<String> {
        let flat: Vec<Map<String, Value>> = self
            .rows
            .iter()
            .map(|r| {
                let mut out = Map::new();
                flatten("", r, &mut out);
                out
            })
            .collect();
        let header: BTreeSet<&String> = flat.iter().flat_map(|m| m.keys()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header.iter().map(|s| s.as_str()))
            .map_err(|e| Error::Io(e.to_string()))?;
        for row in &flat {
            let cells = header.iter().map(|h| match row.get(*h) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
            });
            w.write_record(cells)
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => Ok(self.to_json()),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}
