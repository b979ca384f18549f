//! Tabular output as CSV or JSON lines.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which reads back
//! to the identical `f64`. A missing value is an empty CSV cell or a JSON
//! `null`.

use std::io::{self, BufRead, Write};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}
impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}
impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}
impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}
impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Value {
    fn csv_cell(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Int(i) => i.to_string(),
            Value::Float(f) => format_float(*f),
            Value::Bool(b) => b.to_string(),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Value::Str(s) => serde_json::to_string(s).expect("string serializes"),
            Value::Int(i) => i.to_string(),
            Value::Float(f) if f.is_finite() => format_float(*f),
            // JSON has no non-finite numbers
            Value::Float(f) => serde_json::to_string(&format_float(*f)).expect("string serializes"),
            Value::Bool(b) => b.to_string(),
            Value::Null => "null".into(),
        }
    }

    /// Parses a CSV cell: integers, then booleans, then floats, else text.
    fn parse_cell(s: &str) -> Value {
        if s.is_empty() {
            Value::Null
        } else if let Ok(i) = i64::from_str(s) {
            Value::Int(i)
        } else if let Ok(b) = bool::from_str(s) {
            Value::Bool(b)
        } else if s.contains(['e', '.']) || matches!(s, "NaN" | "inf" | "-inf") {
            f64::from_str(s).map_or_else(|_| Value::Str(s.to_string()), Value::Float)
        } else {
            Value::Str(s.to_string())
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(f) => Some(*f),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

/// Rows under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write<W: Write>(&self, format: Format, w: W) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Jsonl => self.write_jsonl(w),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Value::csv_cell))?;
        }
        out.flush()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in &self.rows {
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| format!("{}:{}", serde_json::to_string(c).expect("string serializes"), v.json()))
                .collect();
            writeln!(w, "{{{}}}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(format: Format, r: R) -> io::Result<Table> {
        match format {
            Format::Csv => Self::read_csv(r),
            Format::Jsonl => Self::read_jsonl(r),
        }
    }

    pub fn read_csv<R: BufRead>(r: R) -> io::Result<Table> {
        let mut rd = csv::Reader::from_reader(r);
        let columns = rd.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            rows.push(rec?.iter().map(Value::parse_cell).collect());
        }
        Ok(Table { columns, rows })
    }

    /// Reads JSON lines; the first record fixes the column order.
    pub fn read_jsonl<R: BufRead>(r: R) -> io::Result<Table> {
        let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
        let mut columns: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let obj: serde_json::Map<String, serde_json::Value> =
                serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            if columns.is_empty() {
                columns = obj.keys().cloned().collect();
            }
            let row = columns
                .iter()
                .map(|c| match obj.get(c) {
                    None | Some(serde_json::Value::Null) => Ok(Value::Null),
                    Some(serde_json::Value::Bool(b)) => Ok(Value::Bool(*b)),
                    Some(serde_json::Value::String(s)) => Ok(match s.as_str() {
                        "NaN" | "inf" | "-inf" => Value::Float(s.parse().expect("non-finite literal")),
                        _ => Value::Str(s.clone()),
                    }),
                    Some(serde_json::Value::Number(n)) => Ok(match n.as_i64() {
                        Some(i) if !n.is_f64() => Value::Int(i),
                        _ => Value::Float(n.as_f64().ok_or_else(|| bad(format!("bad number {n}")))?),
                    }),
                    Some(other) => Err(bad(format!("unexpected value {other}"))),
                })
                .collect::<io::Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }
}
