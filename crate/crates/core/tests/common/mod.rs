#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::Value;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

/// Every descriptor in the fixture corpus, sorted by name.
pub fn corpus() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let n = p.file_name().unwrap().to_string_lossy();
            n.ends_with(".yml") || n.ends_with(".yaml") || n.ends_with(".tf.json")
        })
        .collect();
    out.sort();
    out
}

pub fn stem(path: &Path) -> String {
    let n = path.file_name().unwrap().to_string_lossy().to_string();
    for ext in [".tf.json", ".yml", ".yaml"] {
        if let Some(s) = n.strip_suffix(ext) {
            return s.to_string();
        }
    }
    n
}

/// Runs the CLI in-process; returns (exit code, stdout, stderr).
pub fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("archgen").chain(args.iter().copied());
    let code = archgen::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

// Leaf-path enumeration written separately from the library's, over
// serde_json values, to serve as an oracle.

fn needs_quotes(key: &str) -> bool {
    key.is_empty() || key.contains(['.', '[', ']', '"']) || key.chars().any(char::is_whitespace)
}

fn push_key(prefix: &str, key: &str) -> String {
    if needs_quotes(key) {
        format!("{prefix}[{}]", Value::String(key.to_string()))
    } else if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

pub fn oracle_leaves(v: &Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                oracle_leaves(child, &push_key(prefix, k), out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                oracle_leaves(child, &format!("{prefix}[{i}]"), out);
            }
        }
        _ => out.push(prefix.to_string()),
    }
}

/// All leaf paths of a descriptor file. Multi-document YAML streams are
/// prefixed with `[i]`, counting non-empty documents only.
pub fn descriptor_leaves(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut out = Vec::new();
    if path.to_string_lossy().ends_with(".json") {
        let v: Value = serde_json::from_str(&text).unwrap();
        oracle_leaves(&v, "", &mut out);
        return out;
    }
    use serde::Deserialize;
    let docs: Vec<Value> = serde_yaml::Deserializer::from_str(&text)
        .map(|d| Value::deserialize(d).unwrap())
        .filter(|v| !v.is_null())
        .collect();
    let multi = text.contains("\napiVersion:") || text.starts_with("apiVersion:");
    if multi {
        for (i, d) in docs.iter().enumerate() {
            oracle_leaves(d, &format!("[{i}]"), &mut out);
        }
    } else {
        for d in &docs {
            oracle_leaves(d, "", &mut out);
        }
    }
    out
}
