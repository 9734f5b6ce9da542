//! Reads node and edge statements back out of emitted diagrams.
//!
//! This understands the statement shapes the emitters write, not the full
//! target grammars. Layout directives, comments and styling are skipped.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use super::{EmitOptions, Format, Orientation, HEADER_TAG};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiagramGraph {
    /// Identifier → normalized statement (including a Structurizr
    /// properties block).
    pub nodes: BTreeMap<String, String>,
    /// (from, to, label).
    pub edges: BTreeSet<(String, String, String)>,
    /// 1-based lines of node statements, in document order.
    pub node_lines: Vec<usize>,
    /// 1-based lines of edge statements, in document order.
    pub edge_lines: Vec<usize>,
    /// Whether the legend or styles section is present.
    pub has_legend: bool,
}

impl DiagramGraph {
    pub fn node_count(&self) -> usize {
        self.node_lines.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_lines.len()
    }

    /// Same nodes and edges, ignoring layout and statement order.
    pub fn same_graph(&self, other: &DiagramGraph) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.node_count() == other.node_count()
            && self.edge_count() == other.edge_count()
    }
}

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).unwrap())
}

/// Recovers the format and options from a header line.
pub fn parse_header(text: &str) -> Option<(Format, EmitOptions)> {
    static HEADER: OnceLock<Regex> = OnceLock::new();
    let pattern = format!(
        r#"^(//|%%) {HEADER_TAG} format=(\S+) orientation=(\S+) include-properties=(true|false) system-name=("(?:[^"\\]|\\.)*")\s*$"#
    );
    let first = text.lines().next()?;
    let caps = re(&HEADER, &pattern).captures(first)?;
    let format = Format::parse(&caps[2])?;
    if format.comment() != &caps[1] {
        return None;
    }
    Some((
        format,
        EmitOptions {
            orientation: Orientation::parse(&caps[3])?,
            include_properties: &caps[4] == "true",
            system_name: serde_json::from_str(&caps[5]).ok()?,
        },
    ))
}

fn normalize(line: &str) -> String {
    line.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn parse_diagram(format: Format, text: &str) -> DiagramGraph {
    match format {
        Format::Structurizr => parse_structurizr(text),
        Format::Mermaid => parse_mermaid(text),
        Format::Dot => parse_dot(text),
    }
}

fn parse_structurizr(text: &str) -> DiagramGraph {
    static NODE: OnceLock<Regex> = OnceLock::new();
    static EDGE: OnceLock<Regex> = OnceLock::new();
    let node = re(&NODE, r"^\s*(\w+)\s*=\s*(container|person|softwareSystem)\b");
    let edge = re(&EDGE, r#"^\s*(\w+)\s*->\s*(\w+)\s*"((?:[^"\\]|\\.)*)""#);
    let mut g = DiagramGraph::default();
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        if line.trim_start().starts_with("styles {") {
            g.has_legend = true;
        }
        if let Some(c) = node.captures(line) {
            let ident = c[1].to_string();
            // The enclosing system block is not a node.
            if ident != "softwareSystem" {
                g.node_lines.push(i + 1);
                let mut statement = normalize(line);
                if line.trim_end().ends_with('{') && &c[2] == "container" {
                    let mut depth = 1;
                    while depth > 0 && i + 1 < lines.len() {
                        i += 1;
                        let inner = lines[i].trim();
                        depth += inner.matches('{').count();
                        depth -= inner.matches('}').count().min(depth);
                        statement.push('\n');
                        statement.push_str(&normalize(inner));
                    }
                }
                g.nodes.insert(ident, statement);
            }
        } else if let Some(c) = edge.captures(line) {
            g.edges.insert((c[1].to_string(), c[2].to_string(), c[3].to_string()));
            g.edge_lines.push(i + 1);
        }
        i += 1;
    }
    g
}

fn parse_mermaid(text: &str) -> DiagramGraph {
    static NODE: OnceLock<Regex> = OnceLock::new();
    static EDGE: OnceLock<Regex> = OnceLock::new();
    let node = re(&NODE, r"^\s*(\w+)\s*[\[\(]");
    let edge = re(&EDGE, r"^\s*(\w+)\s*-->\|([^|]*)\|\s*(\w+)\s*$");
    let mut g = DiagramGraph::default();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("classDef ") {
            g.has_legend = true;
            continue;
        }
        if trimmed.starts_with("subgraph ") || trimmed.starts_with("%%") {
            continue;
        }
        if let Some(c) = edge.captures(line) {
            g.edges.insert((c[1].to_string(), c[3].to_string(), c[2].to_string()));
            g.edge_lines.push(i + 1);
        } else if let Some(c) = node.captures(line) {
            g.nodes.insert(c[1].to_string(), normalize(line));
            g.node_lines.push(i + 1);
        }
    }
    g
}

fn parse_dot(text: &str) -> DiagramGraph {
    static NODE: OnceLock<Regex> = OnceLock::new();
    static EDGE: OnceLock<Regex> = OnceLock::new();
    let node = re(&NODE, r"^\s*(\w+)\s*\[");
    let edge = re(&EDGE, r#"^\s*(\w+)\s*->\s*(\w+)\s*\[label="((?:[^"\\]|\\.)*)"\]"#);
    let mut g = DiagramGraph::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "// legend" {
            g.has_legend = true;
            continue;
        }
        if let Some(c) = edge.captures(line) {
            g.edges.insert((c[1].to_string(), c[2].to_string(), c[3].to_string()));
            g.edge_lines.push(i + 1);
        } else if let Some(c) = node.captures(line) {
            if !matches!(&c[1], "node" | "edge" | "graph") {
                g.nodes.insert(c[1].to_string(), normalize(line));
                g.node_lines.push(i + 1);
            }
        }
    }
    g
}

/// Guesses the format of a diagram from its header, else its extension.
pub fn detect_format(path: Option<&std::path::Path>, text: &str) -> Option<Format> {
    if let Some((f, _)) = parse_header(text) {
        return Some(f);
    }
    let ext = path?.extension()?.to_str()?;
    Format::parse(ext)
}
