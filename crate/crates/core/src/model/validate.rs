use std::collections::BTreeSet;
use std::fmt;

use super::{is_known_property, MetaDescriptor, RelationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationFinding {
    pub severity: Severity,
    /// Short machine-readable code such as `duplicate-id` or `cycle`.
    pub code: &'static str,
    pub subject: String,
    pub message: String,
    /// Closed cycle path for `cycle` findings.
    pub cycle: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub findings: Vec<ValidationFinding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    fn push(&mut self, severity: Severity, code: &'static str, subject: &str, message: String) {
        self.findings.push(ValidationFinding {
            severity,
            code,
            subject: subject.to_string(),
            message,
            cycle: None,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .findings
            .iter()
            .map(|x| format!("{} {}: {}", x.code, x.subject, x.message))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks every structural invariant of the meta-descriptor. Findings are
/// data; an empty report means the model is well-formed.
pub fn validate(meta: &MetaDescriptor) -> ValidationReport {
    use Severity::*;
    let mut report = ValidationReport::default();
    let mut ids: BTreeSet<&str> = BTreeSet::new();

    for c in &meta.components {
        if c.id.is_empty() {
            report.push(Error, "empty-id", "<component>", "component id is empty".into());
        } else if !ids.insert(&c.id) {
            report.push(
                Error,
                "duplicate-id",
                &c.id,
                format!("component id `{}` is declared more than once", c.id),
            );
        }
        if c.name.trim().is_empty() {
            report.push(Error, "empty-name", &c.id, "component name is empty".into());
        }
        if let Some(replicas) = c.replicas() {
            if !matches!(replicas.parse::<u64>(), Ok(n) if n > 0) {
                report.push(
                    Error,
                    "bad-replicas",
                    &c.id,
                    format!("replicas `{replicas}` is not a positive integer"),
                );
            }
        }
        for key in c.properties.keys() {
            if !is_known_property(key) {
                report.push(
                    Error,
                    "unknown-property",
                    &c.id,
                    format!("property `{key}` is outside the vocabulary and lacks the `x-` prefix"),
                );
            }
        }
    }

    for e in &meta.externals {
        if e.id.is_empty() {
            report.push(Error, "empty-id", "<external>", "external node id is empty".into());
        } else if !ids.insert(&e.id) {
            report.push(
                Error,
                "duplicate-id",
                &e.id,
                format!("external node id `{}` is already in use", e.id),
            );
        }
    }

    let mut seen_edges = BTreeSet::new();
    for r in &meta.relations {
        let subject = format!("{}->{}", r.from, r.to);
        for end in [&r.from, &r.to] {
            if !meta.has_node(end) {
                report.push(
                    Error,
                    "unknown-endpoint",
                    &subject,
                    format!("relation endpoint `{end}` is not a declared node"),
                );
            }
        }
        if r.from == r.to {
            report.push(
                Error,
                "self-relation",
                &subject,
                format!("`{}` relates to itself", r.from),
            );
        }
        if !seen_edges.insert((&r.from, &r.to, r.kind)) {
            report.push(
                Error,
                "duplicate-relation",
                &subject,
                format!("{} relation declared more than once", r.kind.as_str()),
            );
        }
        if r.kind == RelationKind::DependsOn && (meta.external(&r.from).is_some() || meta.external(&r.to).is_some()) {
            report.push(
                Warning,
                "external-dependency",
                &subject,
                "depends_on relation involves an external node".into(),
            );
        }
    }

    for cycle in meta.dependency_cycles() {
        if cycle.len() == 2 {
            // reported as self-relation
            continue;
        }
        report.findings.push(ValidationFinding {
            severity: Error,
            code: "cycle",
            subject: cycle[0].clone(),
            message: format!("depends_on cycle {}", cycle.join(" -> ")),
            cycle: Some(cycle),
        });
    }

    if let Some(entry) = &meta.entrypoint {
        if meta.component(entry).is_none() {
            report.push(
                Error,
                "unknown-entrypoint",
                entry,
                format!("entrypoint `{entry}` is not a component"),
            );
        }
    }

    report
}
