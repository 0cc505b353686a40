use std::fs;
use std::path::{Path, PathBuf};

use oddcycle::report::{format_f64, to_json_string, write_csv, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Failure;

/// Everything a JSON report carries besides the timings, which live in the
/// manifest so that a fixed seed gives byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema: String,
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub parameters: Value,
    /// File name of the manifest next to the report, when one was written.
    pub manifest: Option<String>,
    pub result: T,
}

/// Provenance of one run. Identical manifests, timings aside, give
/// identical results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub parameters: Value,
    /// Wall-clock seconds per phase, in execution order.
    pub timings: Vec<(String, f64)>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, parameters: Value) -> Self {
        RunManifest {
            schema: SCHEMA_VERSION.into(),
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            parameters,
            timings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.manifest.json", self.command)
    }

    pub fn report<T>(&self, result: T, with_manifest: bool) -> Report<T> {
        Report {
            schema: self.schema.clone(),
            command: self.command.clone(),
            version: self.version.clone(),
            seed: self.seed,
            parameters: self.parameters.clone(),
            manifest: with_manifest.then(|| self.file_name()),
            result,
        }
    }
}

/// Scalar leaves of a JSON value as `(dotted path, text)` rows; arrays are
/// indexed by position and `null` becomes an empty field.
pub fn flatten_scalars(v: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let join = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&join(k), x, out)),
            Value::Array(a) => a
                .iter()
                .enumerate()
                .for_each(|(i, x)| walk(&join(&i.to_string()), x, out)),
            Value::Null => out.push((prefix.into(), String::new())),
            Value::Bool(b) => out.push((prefix.into(), b.to_string())),
            Value::Number(n) => {
                let text = match (n.as_u64(), n.as_i64(), n.as_f64()) {
                    (Some(u), _, _) => u.to_string(),
                    (_, Some(i), _) => i.to_string(),
                    (_, _, Some(f)) => format_f64(f),
                    _ => n.to_string(),
                };
                out.push((prefix.into(), text));
            }
            Value::String(s) => out.push((prefix.into(), s.clone())),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// `key,value` CSV of the scalar leaves.
pub fn scalars_csv(v: &Value) -> Result<String, Failure> {
    let rows: Vec<Vec<String>> = flatten_scalars(v)
        .into_iter()
        .map(|(k, x)| vec![quote(&k), quote(&x)])
        .collect();
    let mut buf = Vec::new();
    write_csv(&mut buf, &["key", "value"], &rows)?;
    Ok(String::from_utf8(buf).expect("CSV of UTF-8 fields"))
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, Failure> {
    Ok(to_json_string(value)?)
}

/// Writes `contents` to `dir/name`, creating `dir` if needed, and records
/// the file in the manifest.
pub fn write_output(dir: &Path, name: &str, contents: &[u8], manifest: &mut RunManifest) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    manifest.outputs.push(name.to_string());
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattening_paths() {
        let v = serde_json::json!({"a": {"b": [1, 2.5]}, "c": null, "d": "x,y"});
        let rows = flatten_scalars(&v);
        assert_eq!(rows[0], ("a.b.0".to_string(), "1".to_string()));
        assert_eq!(rows[1].1, "2.5000000000000000e0");
        assert_eq!(rows[2], ("c".to_string(), String::new()));
        let csv = scalars_csv(&v).unwrap();
        assert!(csv.starts_with("key,value\n"));
        assert!(csv.contains("d,\"x,y\"\n"));
    }

    #[test]
    fn empty_object_has_header_only() {
        assert_eq!(scalars_csv(&serde_json::json!({})).unwrap(), "key,value\n");
    }
}
