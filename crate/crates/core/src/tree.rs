//! Helpers over parsed descriptor trees: leaf key-paths and scalar text.
//!
//! A leaf is any scalar node (null included). Mapping keys join with `.`;
//! keys that contain `.`, `[`, `]`, `"`, whitespace, or are empty are written
//! as `["key"]`. Sequence elements are addressed as `[i]`. Empty mappings and
//! sequences contribute no leaves.

use serde_yaml::Value;

use crate::error::{Error, Result};

pub fn join_key(prefix: &str, key: &str) -> String {
    let needs_brackets = key.is_empty()
        || key
            .chars()
            .any(|c| matches!(c, '.' | '[' | ']' | '"') || c.is_whitespace());
    if needs_brackets {
        let quoted = serde_json::to_string(key).expect("string serialization");
        format!("{prefix}[{quoted}]")
    } else if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

pub fn join_index(prefix: &str, index: usize) -> String {
    format!("{prefix}[{index}]")
}

/// Appends every leaf path below `value` (rooted at `prefix`) to `out`.
pub fn leaf_paths(value: &Value, prefix: &str, out: &mut Vec<String>) {
    match value {
        Value::Mapping(map) => {
            for (k, v) in map {
                let key = key_text(k).unwrap_or_else(|| format!("{k:?}"));
                leaf_paths(v, &join_key(prefix, &key), out);
            }
        }
        Value::Sequence(seq) => {
            for (i, v) in seq.iter().enumerate() {
                leaf_paths(v, &join_index(prefix, i), out);
            }
        }
        Value::Tagged(t) => leaf_paths(&t.value, prefix, out),
        _ => out.push(prefix.to_string()),
    }
}

/// Leaf paths paired with their scalar nodes.
pub fn leaf_values<'a>(value: &'a Value, prefix: &str) -> Vec<(String, &'a Value)> {
    let mut out = Vec::new();
    fn walk<'a>(value: &'a Value, prefix: &str, out: &mut Vec<(String, &'a Value)>) {
        match value {
            Value::Mapping(map) => {
                for (k, v) in map {
                    let key = key_text(k).unwrap_or_else(|| format!("{k:?}"));
                    walk(v, &join_key(prefix, &key), out);
                }
            }
            Value::Sequence(seq) => {
                for (i, v) in seq.iter().enumerate() {
                    walk(v, &join_index(prefix, i), out);
                }
            }
            Value::Tagged(t) => walk(&t.value, prefix, out),
            other => out.push((prefix.to_string(), other)),
        }
    }
    walk(value, prefix, &mut out);
    out
}

pub fn leaves(value: &Value, prefix: &str) -> Vec<String> {
    let mut out = Vec::new();
    leaf_paths(value, prefix, &mut out);
    out
}

/// Textual form of a scalar; `None` for mappings and sequences.
pub fn scalar_text(value: &Value) -> Option<String> {
    match value {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Tagged(t) => scalar_text(&t.value),
        _ => None,
    }
}

pub fn key_text(key: &Value) -> Option<String> {
    match key {
        Value::Null => None,
        other => scalar_text(other),
    }
}

/// Scalar or an error naming `path`.
pub fn expect_scalar(value: &Value, path: &str) -> Result<String> {
    scalar_text(value).ok_or_else(|| Error::schema(path, "expected a scalar value"))
}

/// Non-null scalar or an error naming `path`.
pub fn expect_string(value: &Value, path: &str) -> Result<String> {
    match value {
        Value::Null => Err(Error::schema(path, "expected a value, found null")),
        other => expect_scalar(other, path),
    }
}

/// Iterates a mapping as `(key, value)` pairs, rejecting non-scalar keys.
pub fn entries<'a>(value: &'a Value, path: &str) -> Result<Vec<(String, &'a Value)>> {
    match value {
        Value::Mapping(map) => map
            .iter()
            .map(|(k, v)| {
                key_text(k)
                    .map(|k| (k, v))
                    .ok_or_else(|| Error::schema(path, "mapping keys must be scalars"))
            })
            .collect(),
        Value::Null => Ok(Vec::new()),
        _ => Err(Error::schema(path, "expected a mapping")),
    }
}

pub fn get<'a>(value: &'a Value, key: &str) -> Option<&'a Value> {
    value.as_mapping().and_then(|m| m.get(key))
}

/// Elements of a sequence; null reads as empty and a lone scalar as one element.
pub fn elements<'a>(value: &'a Value, path: &str) -> Result<Vec<&'a Value>> {
    match value {
        Value::Sequence(seq) => Ok(seq.iter().collect()),
        Value::Null => Ok(Vec::new()),
        Value::Mapping(_) => Err(Error::schema(path, "expected a sequence")),
        other => Ok(vec![other]),
    }
}

/// Sequence of scalars, as text.
pub fn string_list(value: &Value, path: &str) -> Result<Vec<String>> {
    elements(value, path)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| expect_string(v, &join_index(path, i)))
        .collect()
}

/// Best-effort 1-based line of the last key in a path, for diagnostics.
pub fn locate(text: &str, path: &str) -> Option<usize> {
    let key = path.rsplit(['.', '[']).find(|s| !s.is_empty() && !s.ends_with(']'))?;
    let needle = format!("{key}:");
    let quoted = format!("\"{key}\"");
    text.lines()
        .position(|l| {
            let t = l.trim_start().trim_start_matches("- ");
            t.starts_with(&needle) || t.starts_with(&quoted)
        })
        .map(|i| i + 1)
}
