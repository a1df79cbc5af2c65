//! Serialisation of command results: JSON records and CSV tables with a
//! fixed number of significant digits.

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

pub const MAX_PRECISION: usize = 15;

/// Rounds numbers to `digits` significant digits on output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision(usize);

impl Precision {
    pub fn new(digits: usize) -> Result<Self> {
        if (1..=MAX_PRECISION).contains(&digits) {
            Ok(Precision(digits))
        } else {
            Err(Error::invalid(
                "precision",
                format!("must be between 1 and {MAX_PRECISION}, got {digits}"),
            ))
        }
    }

    pub fn round(self, x: f64) -> f64 {
        if !x.is_finite() || x == 0.0 {
            return x;
        }
        format!("{:.*e}", self.0 - 1, x).parse().unwrap_or(x)
    }

    /// JSON number, or null for NaN and infinities.
    pub fn json(self, x: f64) -> Value {
        Number::from_f64(self.round(x)).map_or(Value::Null, Value::Number)
    }

    /// CSV cell; non-finite values print as `nan`, `inf` or `-inf`.
    pub fn cell(self, x: f64) -> String {
        if x.is_nan() {
            "nan".into()
        } else if x.is_infinite() {
            if x > 0.0 { "inf" } else { "-inf" }.into()
        } else {
            Number::from_f64(self.round(x)).map_or_else(|| x.to_string(), |n| n.to_string())
        }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(6)
    }
}

/// Ordered key/value builder for the numeric part of a record.
#[derive(Debug, Clone)]
pub struct Fields {
    prec: Precision,
    map: Map<String, Value>,
}

impl Fields {
    pub fn new(prec: Precision) -> Self {
        Fields {
            prec,
            map: Map::new(),
        }
    }

    pub fn num(&mut self, key: impl Into<String>, x: f64) -> &mut Self {
        self.map.insert(key.into(), self.prec.json(x));
        self
    }

    pub fn int(&mut self, key: impl Into<String>, x: u64) -> &mut Self {
        self.map.insert(key.into(), Value::from(x));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, s: impl Into<String>) -> &mut Self {
        self.map.insert(key.into(), Value::String(s.into()));
        self
    }

    pub fn value(&mut self, key: impl Into<String>, v: Value) -> &mut Self {
        self.map.insert(key.into(), v);
        self
    }

    pub fn into_map(self) -> Map<String, Value> {
        self.map
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.map)
    }
}

/// The self-describing document every JSON command prints.
pub fn record(command: &str, system: Option<&str>, inputs: Value, results: Value) -> Value {
    let mut m = Map::new();
    m.insert("tool".into(), Value::from(env!("CARGO_PKG_NAME")));
    m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), Value::from(command));
    if let Some(s) = system {
        m.insert("system".into(), Value::from(s));
    }
    m.insert("inputs".into(), inputs);
    m.insert("results".into(), results);
    Value::Object(m)
}

pub fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are always serialisable");
    s.push('\n');
    s
}

/// Writes a header and rows as CSV.
pub fn csv_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// A flat JSON object as a two-line CSV (keys, values); nested values are
/// written as compact JSON.
pub fn flat_csv(map: &Map<String, Value>) -> String {
    let header: Vec<String> = map.keys().cloned().collect();
    let row: Vec<String> = map
        .values()
        .map(|v| match v {
            Value::String(s) => s.clone(),
            Value::Null => "nan".into(),
            other => other.to_string(),
        })
        .collect();
    csv_table(&header, &[row])
}
