//! Rendering of results and run manifests.

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;

/// Significant digits kept for floating-point output.
const SIGNIFICANT: usize = 15;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT - 1, x).parse().unwrap_or(x)
}

/// Rounds every non-integer number inside `value`.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// `"numerator/denominator"`, also for integers.
pub fn rational_text(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A probability weight as it appears in JSON and CSV.
pub trait Cell {
    fn json(&self) -> Value;
    fn text(&self) -> String;
}

impl Cell for BigRational {
    fn json(&self) -> Value {
        Value::String(rational_text(self))
    }

    fn text(&self) -> String {
        rational_text(self)
    }
}

impl Cell for f64 {
    fn json(&self) -> Value {
        serde_json::Number::from_f64(round_sig(*self)).map_or(Value::Null, Value::Number)
    }

    fn text(&self) -> String {
        let x = round_sig(*self);
        if x != 0.0 && !(1e-5..1e15).contains(&x.abs()) {
            format!("{x:e}")
        } else {
            x.to_string()
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize to JSON")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub table: Table,
    pub seeds: Vec<u64>,
    /// One-line verdict printed to stderr.
    pub summary: Option<String>,
    /// A numerical check did not pass.
    pub failed: bool,
}

impl Report {
    pub fn new(mut json: Value, table: Table) -> Self {
        round_json(&mut json);
        Self {
            json,
            table,
            seeds: Vec::new(),
            summary: None,
            failed: false,
        }
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => {
                let mut bytes =
                    serde_json::to_vec_pretty(&self.json).expect("JSON values serialize");
                bytes.push(b'\n');
                bytes
            }
            Format::Csv => {
                let mut writer = csv::Writer::from_writer(Vec::new());
                writer
                    .write_record(&self.table.header)
                    .expect("in-memory write");
                for row in &self.table.rows {
                    writer.write_record(row).expect("in-memory write");
                }
                writer.into_inner().expect("in-memory flush")
            }
        }
    }
}

pub fn object(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(
        entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seeds: Vec<u64>,
    pub version: String,
    pub started_unix: f64,
    pub wall_time_seconds: f64,
    pub format: String,
    pub output: String,
    pub output_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
