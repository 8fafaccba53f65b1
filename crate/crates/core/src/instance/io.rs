use std::fs;
use std::path::Path;

use serde_json::{Map, Value};
use thiserror::Error;

use super::MiqpInstance;
use crate::numkit::{format_rational, parse_rational, NumError, RatMat, RatVec, Rational};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("PARSE_ERROR at {location}: {msg}")]
    Parse { location: String, msg: String },
    #[error("SCHEMA_VIOLATION: field {0:?}")]
    Schema(String),
}

impl InstanceError {
    pub fn code(&self) -> &'static str {
        match self {
            InstanceError::Io { .. } => "IO_ERROR",
            InstanceError::Parse { .. } => "PARSE_ERROR",
            InstanceError::Schema(_) => "SCHEMA_VIOLATION",
        }
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<MiqpInstance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    instance_from_json(&text)
}

pub fn write_instance(inst: &MiqpInstance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(inst)).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn instance_from_json(text: &str) -> Result<MiqpInstance, InstanceError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        msg: e.to_string(),
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| InstanceError::Schema("<root>".into()))?;
    let n1 = count(obj, "n1")?;
    let n2 = count(obj, "n2")?;
    let n = n1 + n2;
    Ok(MiqpInstance {
        n1,
        n2,
        q: matrix(obj, "Q", n)?,
        c: vector(obj, "c")?,
        a: matrix(obj, "A", n)?,
        b: vector(obj, "b")?,
        e: matrix(obj, "E", n)?,
        f: vector(obj, "f")?,
    })
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value, InstanceError> {
    obj.get(name)
        .ok_or_else(|| InstanceError::Schema(name.to_string()))
}

fn count(obj: &Map<String, Value>, name: &str) -> Result<usize, InstanceError> {
    field(obj, name)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| InstanceError::Schema(name.to_string()))
}

fn entry(value: &Value, location: String) -> Result<Rational, InstanceError> {
    let text = value
        .as_str()
        .ok_or_else(|| InstanceError::Schema(location.clone()))?;
    parse_rational(text).map_err(|e| InstanceError::Parse {
        msg: match e {
            NumError::ZeroDenominator(_) => format!("zero denominator in {text:?}"),
            other => other.to_string(),
        },
        location,
    })
}

fn vector(obj: &Map<String, Value>, name: &str) -> Result<RatVec, InstanceError> {
    let items = field(obj, name)?
        .as_array()
        .ok_or_else(|| InstanceError::Schema(name.to_string()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| entry(v, format!("{name}[{i}]")))
        .collect()
}

fn matrix(obj: &Map<String, Value>, name: &str, n: usize) -> Result<RatMat, InstanceError> {
    let rows = field(obj, name)?
        .as_array()
        .ok_or_else(|| InstanceError::Schema(name.to_string()))?;
    let cols = rows
        .first()
        .and_then(Value::as_array)
        .map_or(n, Vec::len);
    let mut parsed = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| InstanceError::Schema(format!("{name}[{i}]")))?;
        let row = row
            .iter()
            .enumerate()
            .map(|(j, v)| entry(v, format!("{name}[{i}][{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        parsed.push(row);
    }
    RatMat::from_rows(parsed, cols).map_err(|_| InstanceError::Schema(format!("{name} is ragged")))
}

/// Canonical text form: one matrix row per line, every number a `"p/q"` string.
pub fn instance_to_json(inst: &MiqpInstance) -> String {
    fn vec_text(v: &[Rational]) -> String {
        let items: Vec<String> = v.iter().map(|x| format!("\"{}\"", format_rational(x))).collect();
        format!("[{}]", items.join(", "))
    }
    fn mat_text(m: &RatMat) -> String {
        if m.rows() == 0 {
            return "[]".into();
        }
        let rows: Vec<String> = m.row_iter().map(|r| format!("    {}", vec_text(r))).collect();
        format!("[\n{}\n  ]", rows.join(",\n"))
    }
    format!(
        "{{\n  \"n1\": {},\n  \"n2\": {},\n  \"Q\": {},\n  \"c\": {},\n  \"A\": {},\n  \"b\": {},\n  \"E\": {},\n  \"f\": {}\n}}\n",
        inst.n1,
        inst.n2,
        mat_text(&inst.q),
        vec_text(&inst.c),
        mat_text(&inst.a),
        vec_text(&inst.b),
        mat_text(&inst.e),
        vec_text(&inst.f),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::reference_instance;

    #[test]
    fn round_trip() {
        let inst = reference_instance();
        let text = instance_to_json(&inst);
        assert_eq!(instance_from_json(&text).unwrap(), inst);
        assert_eq!(instance_to_json(&instance_from_json(&text).unwrap()), text);
    }

    #[test]
    fn empty_matrices_keep_width() {
        let mut inst = reference_instance();
        inst.a = RatMat::zeros(0, 2);
        inst.b = RatVec::default();
        let back = instance_from_json(&instance_to_json(&inst)).unwrap();
        assert_eq!(back.a.cols(), 2);
        assert_eq!(back, inst);
    }

    #[test]
    fn missing_field_is_schema_violation() {
        let mut doc: Value = serde_json::from_str(&instance_to_json(&reference_instance())).unwrap();
        doc.as_object_mut().unwrap().remove("b");
        match instance_from_json(&doc.to_string()) {
            Err(InstanceError::Schema(f)) => assert_eq!(f, "b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_denominator_is_parse_error() {
        let text = instance_to_json(&reference_instance()).replace("\"b\": [\"1\"]", "\"b\": [\"1/0\"]");
        let err = instance_from_json(&text).unwrap_err();
        assert_eq!(err.code(), "PARSE_ERROR");
        assert!(err.to_string().contains("b[0]"));
    }

    #[test]
    fn float_entries_are_rejected() {
        let text = instance_to_json(&reference_instance()).replace("\"b\": [\"1\"]", "\"b\": [1.0]");
        assert_eq!(instance_from_json(&text).unwrap_err().code(), "SCHEMA_VIOLATION");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = instance_from_json("{\n  \"n1\": 0,\n  oops").unwrap_err();
        assert_eq!(err.code(), "PARSE_ERROR");
        assert!(err.to_string().contains("line 3"));
    }
}
