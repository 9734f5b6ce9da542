//! Diagram guideline checks.
//!
//! | rule | checks                                                        | severity        |
//! |------|---------------------------------------------------------------|-----------------|
//! | G1   | every node has a non-empty name                               | error           |
//! | G2   | the emitted document carries its legend / styles section      | error           |
//! | G3   | every component has a type or at least one property           | warning         |
//! | G4   | the entry point is annotated or is the only unreferenced node | warning / error |
//! | G5   | library images map to a technology tag                        | warning         |
//!
//! G2 is skipped when no document is given. G5 only looks at official
//! library images (`nginx`, `library/redis`); images under a user or
//! organisation namespace are taken to be the system's own code, for which
//! no technology symbol exists.

use std::fmt;

use serde::Serialize;

use crate::backend::{parse_diagram, DacDocument};
use crate::graph;
use crate::model::MetaDescriptor;
use crate::tech::{is_library_image, TechTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    G1,
    G2,
    G3,
    G4,
    G5,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub rule: Rule,
    pub severity: Severity,
    /// Component id, or `document`.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.rule, self.severity, self.subject, self.message)
    }
}

fn finding(rule: Rule, severity: Severity, subject: &str, message: String) -> Finding {
    Finding {
        rule,
        severity,
        subject: subject.to_string(),
        message,
    }
}

/// Components and the relations between them; edges to or from external
/// nodes do not count.
fn edges(meta: &MetaDescriptor) -> (Vec<&str>, Vec<(&str, &str)>) {
    let nodes: Vec<&str> = meta.components.iter().map(|c| c.id.as_str()).collect();
    let edges = meta
        .relations
        .iter()
        .filter(|r| nodes.contains(&r.from.as_str()) && nodes.contains(&r.to.as_str()))
        .map(|r| (r.from.as_str(), r.to.as_str()))
        .collect();
    (nodes, edges)
}

/// Components no other component's relation points at, in component order.
pub fn entry_candidates(meta: &MetaDescriptor) -> Vec<&str> {
    let (nodes, edges) = edges(meta);
    graph::sources(&nodes, &edges)
}

/// Components with no outgoing relation, in component order.
pub fn exit_candidates(meta: &MetaDescriptor) -> Vec<&str> {
    let (nodes, edges) = edges(meta);
    graph::sinks(&nodes, &edges)
}

/// The entry point: the annotated one, else the only candidate.
pub fn entry_point(meta: &MetaDescriptor) -> Option<&str> {
    if let Some(e) = &meta.entrypoint {
        return Some(e);
    }
    match entry_candidates(meta).as_slice() {
        [only] => Some(only),
        _ => None,
    }
}

pub fn lint(meta: &MetaDescriptor, dac: Option<&DacDocument>) -> Vec<Finding> {
    lint_with(meta, dac, &TechTable::default())
}

pub fn lint_with(meta: &MetaDescriptor, dac: Option<&DacDocument>, table: &TechTable) -> Vec<Finding> {
    use Rule::*;
    use Severity::*;
    let mut out = Vec::new();

    for c in &meta.components {
        if c.name.trim().is_empty() {
            out.push(finding(G1, Error, &c.id, "component has no name".into()));
        }
    }
    for e in &meta.externals {
        if e.label.trim().is_empty() {
            out.push(finding(G1, Error, &e.id, "external node has no label".into()));
        }
    }

    if let Some(doc) = dac {
        if !parse_diagram(doc.format, &doc.text).has_legend {
            out.push(finding(
                G2,
                Error,
                "document",
                format!("{} document has no legend or styles section", doc.format),
            ));
        }
    }

    for c in &meta.components {
        if c.component_type.is_none() && c.properties.is_empty() {
            out.push(finding(
                G3,
                Warning,
                &c.id,
                "component has neither a type nor any property".into(),
            ));
        }
    }

    if meta.entrypoint.is_none() && !meta.components.is_empty() {
        let candidates = entry_candidates(meta);
        match candidates.len() {
            1 => {}
            0 => out.push(finding(
                G4,
                Error,
                "document",
                "no entry point: every component has an incoming relation; annotate one with `# arch(*): entrypoint=<id>`".into(),
            )),
            _ => out.push(finding(
                G4,
                Warning,
                "document",
                format!(
                    "ambiguous entry point: {}; annotate one with `# arch(*): entrypoint=<id>`",
                    candidates.join(", ")
                ),
            )),
        }
    }

    for c in &meta.components {
        if let Some(image) = c.artifacts.get("image") {
            if is_library_image(image) && table.lookup(image).is_none() {
                out.push(finding(
                    G5,
                    Warning,
                    &c.id,
                    format!("no technology tag for image `{image}`"),
                ));
            }
        }
    }

    out.sort_by(|a, b| (a.rule, &a.subject).cmp(&(b.rule, &b.subject)));
    out
}

pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}

/// One `RULE SEVERITY subject: message` line per finding.
pub fn report(findings: &[Finding]) -> String {
    findings.iter().map(|f| format!("{f}\n")).collect()
}

pub fn report_yaml(findings: &[Finding]) -> String {
    serde_yaml::to_string(&serde_yaml::Mapping::from_iter([(
        "findings".into(),
        serde_yaml::to_value(findings).expect("findings serialize"),
    )]))
    .expect("yaml serialization")
}
