//! Canonical YAML form of the meta-descriptor.
//!
//! Layout: 2-space indent, LF line endings, top-level keys in the order
//! `components`, `relations`, `externals`, `entrypoint` (all but
//! `components` omitted when empty). Component keys are written in the order
//! name, type, kind, properties, artifacts; `kind` only appears for
//! infrastructure nodes. Scalars are plain unless YAML would read them back
//! differently, in which case they are double-quoted.

use std::fmt::Write as _;

use serde_yaml::Value;

use super::{
    validate, Component, ComponentKind, ExternalNode, MetaDescriptor, NodeClass, Origin, PropertyValue, Relation,
    RelationKind,
};
use crate::error::{Error, Result};
use crate::tree::{entries, expect_scalar, expect_string, join_index, join_key};

pub fn serialize_canonical(meta: &MetaDescriptor) -> Result<String> {
    let report = validate(meta);
    if report.has_errors() {
        return Err(Error::InvalidModel(report));
    }
    Ok(write_document(meta))
}

fn write_document(meta: &MetaDescriptor) -> String {
    let mut out = String::new();
    if meta.components.is_empty() {
        out.push_str("components: {}\n");
    } else {
        out.push_str("components:\n");
    }
    for c in &meta.components {
        line(&mut out, 1, &format!("{}:", scalar(&c.id)));
        line(&mut out, 2, &format!("name: {}", scalar(&c.name)));
        if let Some(t) = &c.component_type {
            line(&mut out, 2, &format!("type: {}", scalar(t)));
        }
        if c.kind != ComponentKind::Deployable {
            line(&mut out, 2, &format!("kind: {}", c.kind.as_str()));
        }
        if !c.properties.is_empty() {
            line(&mut out, 2, "properties:");
            for (k, v) in &c.properties {
                match v {
                    PropertyValue::Scalar(s) => line(&mut out, 3, &format!("{}: {}", scalar(k), scalar(s))),
                    PropertyValue::List(items) if items.is_empty() => line(&mut out, 3, &format!("{}: []", scalar(k))),
                    PropertyValue::List(items) => {
                        line(&mut out, 3, &format!("{}:", scalar(k)));
                        for item in items {
                            line(&mut out, 4, &format!("- {}", scalar(item)));
                        }
                    }
                }
            }
        }
        if !c.artifacts.is_empty() {
            line(&mut out, 2, "artifacts:");
            for (k, v) in &c.artifacts {
                line(&mut out, 3, &format!("{}: {}", scalar(k), scalar(v)));
            }
        }
    }

    if !meta.relations.is_empty() {
        out.push_str("relations:\n");
        for r in &meta.relations {
            line(&mut out, 1, &format!("- out: {}", scalar(&r.from)));
            line(&mut out, 2, &format!("in: {}", scalar(&r.to)));
            line(&mut out, 2, &format!("kind: {}", r.kind.as_str()));
            if let Some(label) = &r.label {
                line(&mut out, 2, &format!("label: {}", scalar(label)));
            }
            if r.origin == Origin::Annotation {
                line(&mut out, 2, "origin: annotation");
            }
        }
    }

    if !meta.externals.is_empty() {
        out.push_str("externals:\n");
        for e in &meta.externals {
            line(&mut out, 1, &format!("{}:", scalar(&e.id)));
            line(&mut out, 2, &format!("label: {}", scalar(&e.label)));
            line(&mut out, 2, &format!("class: {}", e.node_class.as_str()));
        }
    }

    if let Some(entry) = &meta.entrypoint {
        let _ = writeln!(out, "entrypoint: {}", scalar(entry));
    }
    out
}

fn line(out: &mut String, depth: usize, text: &str) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(text);
    out.push('\n');
}

/// Plain when YAML reads the text back as the same scalar, quoted otherwise.
fn scalar(s: &str) -> String {
    if plain_safe(s) {
        s.to_string()
    } else {
        serde_json::to_string(s).expect("string serialization")
    }
}

fn plain_safe(s: &str) -> bool {
    if s.is_empty() || s.contains('\n') || s.contains('\t') {
        return false;
    }
    match serde_yaml::from_str::<Value>(s) {
        Ok(Value::String(t)) => t == s,
        Ok(v @ (Value::Number(_) | Value::Bool(_))) => crate::tree::scalar_text(&v).as_deref() == Some(s),
        _ => false,
    }
}

/// Reads a meta-descriptor document. Key order is free; unknown keys and
/// dangling relation endpoints are schema errors.
pub fn deserialize(text: &str) -> Result<MetaDescriptor> {
    let doc: Value = serde_yaml::from_str(text)?;
    let mut meta = MetaDescriptor::default();

    for (key, value) in entries(&doc, "$")? {
        match key.as_str() {
            "components" => meta.components = read_components(value)?,
            "relations" => {
                for (i, item) in seq(value, "relations")?.iter().enumerate() {
                    meta.relations.insert(read_relation(item, &join_index("relations", i))?);
                }
            }
            "externals" => {
                for (id, body) in entries(value, "externals")? {
                    let path = join_key("externals", &id);
                    meta.externals.push(read_external(id, body, &path)?);
                }
            }
            "entrypoint" => meta.entrypoint = Some(expect_string(value, "entrypoint")?),
            other => return Err(Error::schema(other, "unknown top-level key")),
        }
    }
    if doc.as_mapping().is_none_or(|m| !m.contains_key("components")) {
        return Err(Error::schema("components", "missing required key"));
    }

    for (i, r) in meta.relations.iter().enumerate() {
        for (end, field) in [(&r.from, "out"), (&r.to, "in")] {
            if !meta.has_node(end) {
                return Err(Error::schema(
                    format!("relations[{i}].{field}"),
                    format!("unknown node `{end}`"),
                ));
            }
        }
    }
    if let Some(entry) = &meta.entrypoint {
        if meta.component(entry).is_none() {
            return Err(Error::schema("entrypoint", format!("unknown component `{entry}`")));
        }
    }
    Ok(meta)
}

fn seq<'a>(value: &'a Value, path: &str) -> Result<&'a [Value]> {
    match value {
        Value::Sequence(s) => Ok(s),
        Value::Null => Ok(&[]),
        _ => Err(Error::schema(path, "expected a sequence")),
    }
}

fn read_components(value: &Value) -> Result<Vec<Component>> {
    let mut out = Vec::new();
    for (id, body) in entries(value, "components")? {
        let path = join_key("components", &id);
        let mut c = Component {
            id,
            ..Default::default()
        };
        let mut has_name = false;
        for (key, v) in entries(body, &path)? {
            let at = join_key(&path, &key);
            match key.as_str() {
                "name" => {
                    c.name = expect_scalar(v, &at)?;
                    has_name = true;
                }
                "type" => c.component_type = Some(expect_string(v, &at)?),
                "kind" => {
                    let s = expect_string(v, &at)?;
                    c.kind = ComponentKind::parse(&s)
                        .ok_or_else(|| Error::schema(&at, format!("unknown component kind `{s}`")))?;
                }
                "properties" => {
                    for (pk, pv) in entries(v, &at)? {
                        let ppath = join_key(&at, &pk);
                        let value = match pv {
                            Value::Sequence(items) => PropertyValue::List(
                                items
                                    .iter()
                                    .enumerate()
                                    .map(|(i, x)| expect_scalar(x, &join_index(&ppath, i)))
                                    .collect::<Result<_>>()?,
                            ),
                            other => PropertyValue::Scalar(expect_scalar(other, &ppath)?),
                        };
                        c.properties.insert(pk, value);
                    }
                }
                "artifacts" => {
                    for (ak, av) in entries(v, &at)? {
                        let apath = join_key(&at, &ak);
                        c.artifacts.insert(ak, expect_scalar(av, &apath)?);
                    }
                }
                _ => return Err(Error::schema(at, "unknown component key")),
            }
        }
        if !has_name {
            return Err(Error::schema(join_key(&path, "name"), "missing required key"));
        }
        out.push(c);
    }
    Ok(out)
}

fn read_relation(item: &Value, path: &str) -> Result<Relation> {
    let mut from = None;
    let mut to = None;
    let mut r = Relation::new("", "", RelationKind::DependsOn);
    for (key, v) in entries(item, path)? {
        let at = join_key(path, &key);
        match key.as_str() {
            "out" => from = Some(expect_string(v, &at)?),
            "in" => to = Some(expect_string(v, &at)?),
            "kind" => {
                let s = expect_string(v, &at)?;
                r.kind = RelationKind::parse(&s)
                    .ok_or_else(|| Error::schema(&at, format!("unknown relation kind `{s}`")))?;
            }
            "label" => r.label = Some(expect_scalar(v, &at)?),
            "origin" => {
                r.origin = match expect_string(v, &at)?.as_str() {
                    "annotation" => Origin::Annotation,
                    "descriptor" => Origin::Descriptor,
                    s => return Err(Error::schema(at, format!("unknown origin `{s}`"))),
                }
            }
            _ => return Err(Error::schema(at, "unknown relation key")),
        }
    }
    r.from = from.ok_or_else(|| Error::schema(join_key(path, "out"), "missing required key"))?;
    r.to = to.ok_or_else(|| Error::schema(join_key(path, "in"), "missing required key"))?;
    Ok(r)
}

fn read_external(id: String, body: &Value, path: &str) -> Result<ExternalNode> {
    let mut label = None;
    let mut class = NodeClass::Person;
    for (key, v) in entries(body, path)? {
        let at = join_key(path, &key);
        match key.as_str() {
            "label" => label = Some(expect_scalar(v, &at)?),
            "class" => {
                let s = expect_string(v, &at)?;
                class = NodeClass::parse(&s).ok_or_else(|| Error::schema(&at, format!("unknown node class `{s}`")))?;
            }
            _ => return Err(Error::schema(at, "unknown external key")),
        }
    }
    Ok(ExternalNode {
        label: label.unwrap_or_else(|| id.clone()),
        id,
        node_class: class,
    })
}
