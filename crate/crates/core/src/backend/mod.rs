//! Diagram-as-code emission: Structurizr DSL, Mermaid flowchart, Graphviz DOT.
//!
//! Every document starts with a header comment recording the options it was
//! emitted with, so that it can be regenerated and compared later:
//!
//! ```text
//! // archgen: format=structurizr orientation=top-bottom include-properties=true system-name="Software System"
//! ```
//!
//! Mermaid uses `%%` instead of `//`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate, ComponentKind, MetaDescriptor, NodeClass};
use crate::tech::TechTable;

mod dot;
mod mermaid;
pub mod parse;
mod structurizr;

pub use parse::{parse_diagram, parse_header, DiagramGraph};

const HEADER_TAG: &str = "archgen:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Structurizr,
    Mermaid,
    Dot,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Structurizr, Format::Mermaid, Format::Dot];

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Structurizr => "structurizr",
            Format::Mermaid => "mermaid",
            Format::Dot => "dot",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "structurizr" | "dsl" => Some(Format::Structurizr),
            "mermaid" | "mmd" => Some(Format::Mermaid),
            "dot" | "gv" | "graphviz" => Some(Format::Dot),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Structurizr => "dsl",
            Format::Mermaid => "mmd",
            Format::Dot => "dot",
        }
    }

    pub fn comment(self) -> &'static str {
        match self {
            Format::Mermaid => "%%",
            _ => "//",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    #[default]
    TopBottom,
    LeftRight,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::TopBottom => "top-bottom",
            Orientation::LeftRight => "left-right",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "top-bottom" | "tb" | "TB" | "td" | "TD" => Some(Orientation::TopBottom),
            "left-right" | "lr" | "LR" => Some(Orientation::LeftRight),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EmitOptions {
    pub orientation: Orientation,
    pub system_name: String,
    pub include_properties: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            orientation: Orientation::TopBottom,
            system_name: "Software System".into(),
            include_properties: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DacDocument {
    pub format: Format,
    pub text: String,
    /// Hex SHA-256 of `text`.
    pub digest: String,
    pub options_used: EmitOptions,
}

/// Header line for `format` and `opts`, without the trailing newline.
pub fn header(format: Format, opts: &EmitOptions) -> String {
    format!(
        "{} {HEADER_TAG} format={} orientation={} include-properties={} system-name={}",
        format.comment(),
        format,
        opts.orientation.as_str(),
        opts.include_properties,
        serde_json::to_string(&opts.system_name).expect("string serialization"),
    )
}

const RESERVED: &[&str] = &[
    "workspace",
    "model",
    "views",
    "styles",
    "softwaresystem",
    "system",
    "container",
    "component",
    "person",
    "element",
    "relationship",
    "group",
    "include",
    "exclude",
    "autolayout",
    "properties",
    "tags",
    "this",
    "graph",
    "digraph",
    "subgraph",
    "node",
    "edge",
    "strict",
    "end",
    "flowchart",
    "classdef",
    "class",
    "style",
    "click",
    "legend",
    "system_boundary",
];

/// Maps node ids to identifiers every target grammar accepts: lowercase
/// ASCII alphanumerics and `_`, not starting with a digit, not a keyword.
/// Ids that collide after sanitizing get `_2`, `_3`, ... in input order.
pub fn sanitize_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, String> {
    let mut taken = HashSet::new();
    let mut out = BTreeMap::new();
    for id in ids {
        if out.contains_key(id) {
            continue;
        }
        let mut base: String = id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() {
                    c.to_ascii_lowercase()
                } else {
                    '_'
                }
            })
            .collect();
        if base.is_empty() || base.starts_with(|c: char| c.is_ascii_digit()) {
            base.insert(0, 'n');
        }
        if RESERVED.contains(&base.as_str()) {
            base.push('_');
        }
        let mut candidate = base.clone();
        let mut n = 2;
        while !taken.insert(candidate.clone()) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        out.insert(id.to_string(), candidate);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Shape {
    Container,
    Infrastructure,
    Person,
    External,
}

/// Format-neutral view of one node.
#[derive(Debug, Clone)]
pub(crate) struct NodeView {
    pub ident: String,
    pub name: String,
    /// Component type, then replicas.
    pub description: String,
    pub technology: String,
    /// Technology tag of the image, when the table knows it.
    pub tech_tag: Option<String>,
    pub tags: Vec<String>,
    pub properties: Vec<(String, String)>,
    pub shape: Shape,
}

#[derive(Debug, Clone)]
pub(crate) struct EdgeView {
    pub from: String,
    pub to: String,
    pub label: String,
}

pub(crate) struct View {
    pub components: Vec<NodeView>,
    pub externals: Vec<NodeView>,
    pub edges: Vec<EdgeView>,
    pub tags: Vec<String>,
}

const INFRASTRUCTURE_TAG: &str = "Infrastructure";

fn build_view(meta: &MetaDescriptor, opts: &EmitOptions) -> View {
    let table = TechTable::default();
    let idents = sanitize_ids(
        meta.components
            .iter()
            .map(|c| c.id.as_str())
            .chain(meta.externals.iter().map(|e| e.id.as_str())),
    );
    let components = meta
        .components
        .iter()
        .map(|c| {
            let replicas = c.replicas().map(|r| format!("Replicas: {r}"));
            let description = [c.component_type.clone(), replicas.clone()]
                .into_iter()
                .flatten()
                .collect::<Vec<_>>()
                .join(", ");
            let tech_tag = c
                .artifacts
                .get("image")
                .and_then(|i| table.lookup(i))
                .map(str::to_string);
            let mut tags: Vec<String> = tech_tag.iter().cloned().collect();
            if c.kind == ComponentKind::Infrastructure {
                tags.push(INFRASTRUCTURE_TAG.to_string());
            }
            tags.extend(replicas);
            NodeView {
                ident: idents[&c.id].clone(),
                name: c.name.clone(),
                description,
                technology: c.technology().unwrap_or_default().to_string(),
                tech_tag,
                tags,
                properties: if opts.include_properties {
                    c.properties.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
                } else {
                    Vec::new()
                },
                shape: match c.kind {
                    ComponentKind::Deployable => Shape::Container,
                    ComponentKind::Infrastructure => Shape::Infrastructure,
                },
            }
        })
        .collect();
    let externals = meta
        .externals
        .iter()
        .map(|e| NodeView {
            ident: idents[&e.id].clone(),
            name: e.label.clone(),
            description: String::new(),
            technology: String::new(),
            tech_tag: None,
            tags: Vec::new(),
            properties: Vec::new(),
            shape: match e.node_class {
                NodeClass::Person => Shape::Person,
                NodeClass::ExternalSystem => Shape::External,
            },
        })
        .collect();
    let edges = meta
        .relations
        .iter()
        .map(|r| EdgeView {
            from: idents[&r.from].clone(),
            to: idents[&r.to].clone(),
            label: match &r.label {
                Some(l) => format!("{}: {l}", r.kind.as_str()),
                None => r.kind.as_str().to_string(),
            },
        })
        .collect();
    let mut tags: Vec<String> = table.tags().into_iter().map(str::to_string).collect();
    tags.push(INFRASTRUCTURE_TAG.into());
    View {
        components,
        externals,
        edges,
        tags,
    }
}

/// Renders `meta` as diagram-as-code. The text depends only on the model
/// and the options.
pub fn emit(meta: &MetaDescriptor, opts: &EmitOptions, format: Format) -> Result<DacDocument> {
    let report = validate(meta);
    if report.has_errors() {
        return Err(Error::InvalidModel(report));
    }
    let view = build_view(meta, opts);
    let mut text = header(format, opts);
    text.push('\n');
    match format {
        Format::Structurizr => structurizr::render(&view, opts, &mut text),
        Format::Mermaid => mermaid::render(&view, opts, &mut text),
        Format::Dot => dot::render(&view, opts, &mut text),
    }
    Ok(DacDocument {
        format,
        digest: crate::frontend::digest(&text),
        text,
        options_used: opts.clone(),
    })
}
