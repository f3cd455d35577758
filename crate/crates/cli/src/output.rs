use std::io::{self, Write};
use std::path::Path;

use serde::ser::{Error as _, SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

pub const SCHEMA_VERSION: u64 = 1;

/// Round-trip exact rendering used for every float in JSON and CSV output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug)]
pub enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Floats(Vec<f64>),
    Records(Vec<Record>),
    Nested(Record),
    Null,
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_f64(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Floats(v) => v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";"),
            Cell::Records(_) | Cell::Nested(_) => String::new(),
            Cell::Null => String::new(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Cell::Float(x) => x.is_finite(),
            Cell::Floats(v) => v.iter().all(|x| x.is_finite()),
            Cell::Records(r) => r.iter().all(Record::is_finite),
            Cell::Nested(r) => r.is_finite(),
            _ => true,
        }
    }
}

/// Ordered key/value list; key order is preserved in both output formats.
#[derive(Clone, Debug, Default)]
pub struct Record(pub Vec<(&'static str, Cell)>);

impl Record {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn push(&mut self, key: &'static str, value: Cell) -> &mut Self {
        self.0.push((key, value));
        self
    }

    pub fn str(&mut self, key: &'static str, v: impl Into<String>) -> &mut Self {
        self.push(key, Cell::Str(v.into()))
    }

    pub fn int(&mut self, key: &'static str, v: i64) -> &mut Self {
        self.push(key, Cell::Int(v))
    }

    pub fn float(&mut self, key: &'static str, v: f64) -> &mut Self {
        self.push(key, Cell::Float(v))
    }

    pub fn bool(&mut self, key: &'static str, v: bool) -> &mut Self {
        self.push(key, Cell::Bool(v))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|(_, c)| c.is_finite())
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Str(v) => s.serialize_str(v),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Float(v) => {
                if !v.is_finite() {
                    return Err(S::Error::custom(format!("refusing to serialize non-finite value {v}")));
                }
                s.serialize_f64(*v)
            }
            Cell::Bool(v) => s.serialize_bool(*v),
            Cell::Floats(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for x in v {
                    seq.serialize_element(&Cell::Float(*x))?;
                }
                seq.end()
            }
            Cell::Records(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for r in v {
                    seq.serialize_element(r)?;
                }
                seq.end()
            }
            Cell::Nested(r) => r.serialize(s),
            Cell::Null => s.serialize_unit(),
        }
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// serde_json formatter printing floats with 17 significant digits.
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).map_err(|e| e.to_string())?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| e.to_string())
}

/// Flat records to CSV; nested cells are skipped.
pub fn to_csv(rows: &[Record], header: &[&str]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        let fields: Vec<String> = header
            .iter()
            .map(|h| r.0.iter().find(|(k, _)| k == h).map(|(_, c)| c.csv_text()).unwrap_or_default())
            .collect();
        w.write_record(&fields).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

/// Single-writer file emission.
pub fn write_file(path: &Path, text: &str) -> io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()
}
