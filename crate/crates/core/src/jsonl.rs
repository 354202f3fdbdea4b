//! Canonical JSON / JSONL encoding shared by every file the tools write.
//!
//! Objects are emitted with sorted keys, lines end in LF, and floats are
//! rounded to 9 significant digits before encoding.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Serializes `value` as a single line of JSON with sorted object keys.
pub fn to_canonical_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json::Value objects are BTreeMap-backed, so keys come out sorted.
    let mut v = serde_json::to_value(value)?;
    round_floats(&mut v);
    serde_json::to_string(&v)
}

pub fn to_canonical_pretty<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Rounds to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Applies [`round_sig9`] to every non-integer number in `v`.
pub fn round_floats(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig9(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    for item in items {
        let line = to_canonical_string(item).map_err(io::Error::other)?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Dotted paths of object keys present in `input` but absent from `known`.
pub fn unknown_keys(input: &serde_json::Value, known: &serde_json::Value) -> Vec<String> {
    use serde_json::Value;
    fn walk(input: &Value, known: &Value, path: &str, out: &mut Vec<String>) {
        match (input, known) {
            (Value::Object(a), Value::Object(b)) => {
                for (k, v) in a {
                    let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                    match b.get(k) {
                        Some(w) => walk(v, w, &p, out),
                        None => out.push(p),
                    }
                }
            }
            (Value::Array(a), Value::Array(b)) => {
                for (i, (v, w)) in a.iter().zip(b).enumerate() {
                    walk(v, w, &format!("{path}[{i}]"), out);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(input, known, "", &mut out);
    out
}

/// Parses a JSON configuration document. In strict mode any field the
/// target type does not define is an error; otherwise such fields are
/// returned for the caller to warn about.
pub fn parse_config<T: DeserializeOwned + Serialize>(text: &str, strict: bool) -> Result<(T, Vec<String>), String> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let value: T = serde_json::from_value(raw.clone()).map_err(|e| e.to_string())?;
    let known = serde_json::to_value(&value).map_err(|e| e.to_string())?;
    let extra = unknown_keys(&raw, &known);
    if strict && !extra.is_empty() {
        return Err(format!("unknown field(s): {}", extra.join(", ")));
    }
    Ok((value, extra))
}

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

/// Parses every non-blank line of a JSONL file. Each item is paired with
/// its 1-based line number; per-line parse failures are returned alongside
/// rather than aborting the read.
pub fn read_jsonl_lenient<T: DeserializeOwned>(
    path: &Path,
) -> Result<(Vec<(usize, T)>, Vec<(usize, String)>), JsonlError> {
    let io_err = |source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => ok.push((i + 1, v)),
            Err(e) => bad.push((i + 1, e.to_string())),
        }
    }
    Ok((ok, bad))
}

/// Like [`read_jsonl_lenient`] but fails on the first malformed line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let (ok, bad) = read_jsonl_lenient(path)?;
    if let Some((line, message)) = bad.into_iter().next() {
        return Err(JsonlError::Parse {
            path: path.display().to_string(),
            line,
            message,
        });
    }
    Ok(ok.into_iter().map(|(_, v)| v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn keys_sorted() {
        let mut m = HashMap::new();
        m.insert("b", 1);
        m.insert("a", 2);
        m.insert("c", 3);
        assert_eq!(to_canonical_string(&m).unwrap(), r#"{"a":2,"b":1,"c":3}"#);
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(round_sig9(1.0 / 3.0), 0.333333333);
        assert_eq!(round_sig9(2.0 / 3.0), 0.666666667);
        assert_eq!(round_sig9(0.1414213562373095), 0.141421356);
        assert_eq!(round_sig9(1.0), 1.0);
        assert_eq!(round_sig9(0.0), 0.0);
    }

    #[test]
    fn floats_rounded_when_encoded() {
        let v = serde_json::json!({"x": [1.0 / 3.0, 7], "y": {"z": 0.1 + 0.2}});
        assert_eq!(
            to_canonical_string(&v).unwrap(),
            r#"{"x":[0.333333333,7],"y":{"z":0.3}}"#
        );
    }

    #[derive(Debug, serde::Deserialize, Serialize)]
    struct Cfg {
        a: u32,
        #[serde(default)]
        inner: Option<Inner>,
    }

    #[derive(Debug, serde::Deserialize, Serialize)]
    struct Inner {
        b: u32,
    }

    #[test]
    fn config_unknown_fields() {
        let text = r#"{"a": 1, "inner": {"b": 2, "c": 3}, "d": 4}"#;
        let err = parse_config::<Cfg>(text, true).unwrap_err();
        assert!(err.contains("inner.c") && err.contains("d"), "{err}");
        let (cfg, extra) = parse_config::<Cfg>(text, false).unwrap();
        assert_eq!(cfg.a, 1);
        assert_eq!(extra, vec!["d".to_string(), "inner.c".to_string()]);
        assert!(parse_config::<Cfg>(r#"{"a": 1}"#, true).unwrap().1.is_empty());
    }
}
