//! Run manifests and table output.

use std::collections::BTreeMap;

use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

/// Bumped whenever a column set or the manifest layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// RFC 3339; excluded from the hash.
    pub timestamp: String,
    pub schema_version: u32,
}

impl RunManifest {
    pub fn new(command: &str, params: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            params,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: now_rfc3339(),
            schema_version: SCHEMA_VERSION,
        }
    }

    fn hashed_fields(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert(
            "params".into(),
            Value::Object(self.params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()),
        );
        m.insert("seed".into(), self.seed.map_or(Value::Null, |s| Value::Number(s.into())));
        m.insert("tool_version".into(), Value::String(self.tool_version.clone()));
        m.insert("schema_version".into(), Value::Number(self.schema_version.into()));
        Value::Object(m)
    }

    /// SHA-256 of the canonical JSON of every field except the timestamp.
    pub fn determinism_hash(&self) -> String {
        let canonical = serde_json::to_string(&self.hashed_fields()).expect("manifest serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.hashed_fields();
        let m = v.as_object_mut().expect("object");
        m.insert("timestamp".into(), Value::String(self.timestamp.clone()));
        m.insert("determinism_hash".into(), Value::String(self.determinism_hash()));
        v
    }

    fn comment_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("command: {}", self.command),
            format!("tool_version: {}", self.tool_version),
            format!("schema_version: {}", self.schema_version),
            format!("seed: {}", self.seed.map_or("none".to_string(), |s| s.to_string())),
        ];
        out.extend(self.params.iter().map(|(k, v)| format!("param.{k}: {v}")));
        out.push(format!("timestamp: {}", self.timestamp));
        out.push(format!("determinism_hash: {}", self.determinism_hash()));
        out
    }
}

/// `SOURCE_DATE_EPOCH` pins the timestamp for reproducible files.
fn now_rfc3339() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    /// Value not available for this row.
    Missing,
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::Number((*v).into()),
            Cell::Float(v) if v.is_finite() => {
                Value::Number(format_float(*v).parse::<Number>().expect("finite float text is a JSON number"))
            }
            Cell::Float(_) | Cell::Missing => Value::Null,
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }
}

/// CSV: `#` manifest lines, header, rows. JSON: `{manifest, columns, rows}`.
pub fn emit_table(manifest: &RunManifest, table: &Table, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut out = Vec::new();
            for line in manifest.comment_lines() {
                out.extend_from_slice(format!("# {line}\n").as_bytes());
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns).expect("in-memory write");
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv_text)).expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
        Format::Json => {
            let mut m = Map::new();
            m.insert("manifest".into(), manifest.to_json());
            m.insert(
                "columns".into(),
                Value::Array(table.columns.iter().map(|c| Value::String(c.to_string())).collect()),
            );
            m.insert(
                "rows".into(),
                Value::Array(table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect()),
            );
            let mut bytes = serde_json::to_vec_pretty(&Value::Object(m)).expect("JSON serializes");
            bytes.push(b'\n');
            bytes
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        let mut params = BTreeMap::new();
        params.insert("p".into(), "0.3".into());
        RunManifest::new("cdf", params, Some(7))
    }

    #[test]
    fn hash_ignores_timestamp() {
        let a = manifest();
        let mut b = a.clone();
        b.timestamp = "1970-01-01T00:00:00Z".into();
        assert_eq!(a.determinism_hash(), b.determinism_hash());
        b.seed = Some(8);
        assert_ne!(a.determinism_hash(), b.determinism_hash());
    }

    #[test]
    fn empty_table_is_manifest_and_header() {
        let t = Table::new(vec!["x", "value"]);
        let text = String::from_utf8(emit_table(&manifest(), &t, Format::Csv)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[..lines.len() - 1].iter().all(|l| l.starts_with('#')));
        assert_eq!(*lines.last().unwrap(), "x,value");
    }

    #[test]
    fn floats_round_trip_through_json() {
        let values = [0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 5e-324];
        let mut t = Table::new(vec!["v"]);
        for &v in &values {
            t.push(vec![v.into()]);
        }
        t.push(vec![Cell::Float(f64::NAN)]);
        let parsed: Value = serde_json::from_slice(&emit_table(&manifest(), &t, Format::Json)).unwrap();
        let rows = parsed["rows"].as_array().unwrap();
        for (row, &v) in rows.iter().zip(&values) {
            let text = row[0].to_string();
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert!(rows[values.len()][0].is_null());
        for &v in &values {
            assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn text_with_commas_is_quoted() {
        let mut t = Table::new(vec!["name", "pass"]);
        t.push(vec!["f(k=1,p=0.2)".into(), true.into()]);
        let text = String::from_utf8(emit_table(&manifest(), &t, Format::Csv)).unwrap();
        assert!(text.ends_with("\"f(k=1,p=0.2)\",true\n"));
    }
}
