//! Architecture annotations carried in descriptor comments.
//!
//! Grammar, one directive per line:
//!
//! ```text
//! # arch(<id|*>): <directive>=<value>
//! ```
//!
//! | directive    | target        | value                                         |
//! |--------------|---------------|-----------------------------------------------|
//! | `type`       | component     | free text                                     |
//! | `kind`       | component     | `deployable` or `infrastructure`              |
//! | `depends-on` | component     | comma-separated component ids                 |
//! | `entrypoint` | `*` or the id | component id                                  |
//! | `external`   | `*` or the id | `ext->comp "label" [person\|external_system]` |
//! | `ignore`     | `*`           | leaf path (prefix) of the descriptor          |
//!
//! In `external`, the arrow may point either way; the side that names an
//! existing component is the component. Lines in a `.arch` sidecar follow
//! the same grammar, with the leading `#` optional.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;

use crate::coverage::CoverageLedger;
use crate::error::{Error, Result};
use crate::model::{ComponentKind, ExternalNode, MetaDescriptor, NodeClass, Relation, RelationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Directive {
    Type,
    DependsOn,
    External,
    Entrypoint,
    Ignore,
    Kind,
}

impl Directive {
    pub fn as_str(self) -> &'static str {
        match self {
            Directive::Type => "type",
            Directive::DependsOn => "depends-on",
            Directive::External => "external",
            Directive::Entrypoint => "entrypoint",
            Directive::Ignore => "ignore",
            Directive::Kind => "kind",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "type" => Directive::Type,
            "depends-on" => Directive::DependsOn,
            "external" => Directive::External,
            "entrypoint" => Directive::Entrypoint,
            "ignore" => Directive::Ignore,
            "kind" => Directive::Kind,
            _ => return None,
        })
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    /// Component id, or `*` for document-wide directives.
    pub target: String,
    pub directive: Directive,
    pub value: String,
    pub source_line: usize,
    /// File the annotation was read from, when it differs from the descriptor.
    pub file: Option<String>,
}

impl Annotation {
    pub fn new(target: &str, directive: Directive, value: &str, source_line: usize) -> Self {
        Annotation {
            target: target.to_string(),
            directive,
            value: value.to_string(),
            source_line,
            file: None,
        }
    }

    fn fail(&self, e: Error) -> Error {
        match &self.file {
            Some(f) => e.in_file(f.clone()),
            None => e,
        }
    }

    fn malformed(&self, message: impl Into<String>) -> Error {
        self.fail(Error::Annotation {
            line: self.source_line,
            message: message.into(),
        })
    }
}

/// Value of an `external` directive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSpec {
    pub left: String,
    pub right: String,
    pub label: Option<String>,
    pub node_class: NodeClass,
}

fn line_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^arch\(([^()\s]+)\):\s*([A-Za-z-]+)\s*=\s*(.*?)\s*$").unwrap())
}

fn external_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"^([^\s"<>-][^\s"<>]*?)\s*->\s*([^\s"<>]+)(?:\s+"((?:[^"\\]|\\.)*)")?(?:\s+([a-z_]+))?$"#).unwrap()
    })
}

pub fn parse_external(value: &str) -> Option<ExternalSpec> {
    let caps = external_pattern().captures(value)?;
    let node_class = match caps.get(4) {
        Some(m) => NodeClass::parse(m.as_str())?,
        None => NodeClass::Person,
    };
    Some(ExternalSpec {
        left: caps[1].to_string(),
        right: caps[2].to_string(),
        label: caps.get(3).map(|m| m.as_str().replace("\\\"", "\"")),
        node_class,
    })
}

/// Parses one comment body (the text after `#`). `Ok(None)` when the comment
/// is not an annotation.
fn parse_comment(body: &str, line: usize) -> Result<Option<Annotation>> {
    let body = body.trim();
    if !body.starts_with("arch(") {
        return Ok(None);
    }
    let bad = |message: String| Error::Annotation { line, message };
    let caps = line_pattern()
        .captures(body)
        .ok_or_else(|| bad(format!("expected `arch(<id|*>): <directive>=<value>`, found `{body}`")))?;
    let directive = Directive::parse(&caps[2]).ok_or_else(|| bad(format!("unknown directive `{}`", &caps[2])))?;
    let ann = Annotation::new(&caps[1], directive, &caps[3], line);
    check_value(&ann)?;
    Ok(Some(ann))
}

fn check_value(ann: &Annotation) -> Result<()> {
    let bad = |message: String| Err(ann.malformed(message));
    if ann.value.is_empty() {
        return bad(format!("`{}` needs a value", ann.directive));
    }
    let wildcard = ann.target == "*";
    match ann.directive {
        Directive::Type | Directive::Kind | Directive::DependsOn if wildcard => {
            bad(format!("`{}` needs a component target, not `*`", ann.directive))
        }
        Directive::Kind if ComponentKind::parse(&ann.value).is_none() => bad(format!(
            "kind must be `deployable` or `infrastructure`, found `{}`",
            ann.value
        )),
        Directive::DependsOn if ann.value.split(',').any(|d| d.trim().is_empty()) => {
            bad(format!("empty id in depends-on list `{}`", ann.value))
        }
        Directive::Entrypoint if !wildcard && ann.target != ann.value => bad(format!(
            "entrypoint on `{}` names a different component `{}`",
            ann.target, ann.value
        )),
        Directive::External if parse_external(&ann.value).is_none() => bad(format!(
            "expected `ext->component \"label\" [person|external_system]`, found `{}`",
            ann.value
        )),
        Directive::Ignore if !wildcard => bad("`ignore` takes the `*` target".into()),
        _ => Ok(()),
    }
}

/// Annotations in the `#` comments of a YAML descriptor.
pub fn extract_annotations(text: &str) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (line, body) in crate::frontend::comment_lines(text) {
        if let Some(a) = parse_comment(&body, line)? {
            out.push(a);
        }
    }
    Ok(out)
}

/// Annotations in a sidecar file: one per line, `#` optional, blank lines
/// and other comments skipped.
pub fn extract_sidecar(text: &str) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.trim();
        let body = body.strip_prefix('#').unwrap_or(body);
        if let Some(a) = parse_comment(body, i + 1)? {
            out.push(a);
        }
    }
    Ok(out)
}

/// Merges annotations into `meta`. The same list applied twice yields the
/// same model as applying it once.
pub fn apply_annotations(mut meta: MetaDescriptor, anns: &[Annotation]) -> Result<MetaDescriptor> {
    for ann in anns {
        check_value(ann)?;
    }
    check_conflicts(anns)?;
    for ann in anns {
        apply_one(&mut meta, ann)?;
    }
    if let Some(cycle) = meta.dependency_cycles().into_iter().next() {
        let closing = anns
            .iter()
            .filter(|a| a.directive == Directive::DependsOn)
            .find(|a| cycle.contains(&a.target));
        let e = Error::DependencyCycle { cycle };
        return Err(match closing {
            Some(a) => a.fail(e),
            None => e,
        });
    }
    Ok(meta)
}

/// Scalar directives may be set once per target; repeats must agree.
fn check_conflicts(anns: &[Annotation]) -> Result<()> {
    let key = |a: &Annotation| -> Option<(String, Directive)> {
        match a.directive {
            Directive::Type | Directive::Kind => Some((a.target.clone(), a.directive)),
            Directive::Entrypoint => Some(("*".into(), a.directive)),
            Directive::External => parse_external(&a.value).map(|s| (format!("{}->{}", s.left, s.right), a.directive)),
            _ => None,
        }
    };
    for (i, second) in anns.iter().enumerate() {
        let Some(k) = key(second) else { continue };
        if let Some(first) = anns[..i]
            .iter()
            .find(|a| key(a).as_ref() == Some(&k) && a.value != second.value)
        {
            return Err(second.fail(Error::ConflictingAnnotation {
                line: second.source_line,
                first_line: first.source_line,
                target: k.0,
                directive: second.directive.to_string(),
                first: first.value.clone(),
                second: second.value.clone(),
            }));
        }
    }
    Ok(())
}

fn require_component(meta: &MetaDescriptor, ann: &Annotation, id: &str) -> Result<()> {
    if meta.component(id).is_some() {
        Ok(())
    } else {
        Err(ann.fail(Error::UnknownTarget {
            line: ann.source_line,
            target: id.to_string(),
        }))
    }
}

fn apply_one(meta: &mut MetaDescriptor, ann: &Annotation) -> Result<()> {
    if ann.target != "*" {
        require_component(meta, ann, &ann.target)?;
    }
    match ann.directive {
        Directive::Type => {
            meta.component_mut(&ann.target).unwrap().component_type = Some(ann.value.clone());
        }
        Directive::Kind => {
            meta.component_mut(&ann.target).unwrap().kind = ComponentKind::parse(&ann.value).unwrap();
        }
        Directive::DependsOn => {
            for dep in ann.value.split(',').map(str::trim) {
                require_component(meta, ann, dep)?;
                if dep == ann.target {
                    return Err(ann.malformed(format!("`{dep}` cannot depend on itself")));
                }
                if !meta.has_relation(&ann.target, dep, RelationKind::DependsOn) {
                    meta.relations
                        .insert(Relation::new(&ann.target, dep, RelationKind::DependsOn).annotated());
                }
            }
        }
        Directive::Entrypoint => {
            require_component(meta, ann, &ann.value)?;
            meta.entrypoint = Some(ann.value.clone());
        }
        Directive::External => apply_external(meta, ann)?,
        // Ledger-only; see `apply_ignores`.
        Directive::Ignore => {}
    }
    Ok(())
}

fn apply_external(meta: &mut MetaDescriptor, ann: &Annotation) -> Result<()> {
    let spec = parse_external(&ann.value).expect("checked by check_value");
    let (ext, comp, outward) = match (meta.component(&spec.left), meta.component(&spec.right)) {
        (None, Some(_)) => (&spec.left, &spec.right, false),
        (Some(_), None) => (&spec.right, &spec.left, true),
        (Some(_), Some(_)) => {
            return Err(ann.malformed(format!(
                "both `{}` and `{}` are components; one side must be the external node",
                spec.left, spec.right
            )))
        }
        (None, None) => {
            return Err(ann.fail(Error::UnknownTarget {
                line: ann.source_line,
                target: spec.right.clone(),
            }))
        }
    };
    if ann.target != "*" && ann.target != *comp {
        return Err(ann.malformed(format!(
            "external on `{}` links a different component `{comp}`",
            ann.target
        )));
    }
    let node = ExternalNode {
        id: ext.clone(),
        label: spec.label.clone().unwrap_or_else(|| ext.clone()),
        node_class: spec.node_class,
    };
    match meta.external(ext) {
        Some(existing) if *existing != node => {
            return Err(ann.malformed(format!(
                "external `{ext}` already declared with a different label or class"
            )))
        }
        Some(_) => {}
        None => meta.externals.push(node),
    }
    let (from, to) = if outward { (comp, ext) } else { (ext, comp) };
    meta.relations
        .insert(Relation::new(from.as_str(), to.as_str(), RelationKind::Interacts).annotated());
    Ok(())
}

/// Moves every ledger path under an `ignore` annotation into the ignored
/// set. A path matches when it equals the value or continues it with `.`
/// or `[`.
pub fn apply_ignores(ledger: &mut CoverageLedger, anns: &[Annotation]) -> Result<()> {
    for ann in anns.iter().filter(|a| a.directive == Directive::Ignore) {
        let prefix = ann.value.as_str();
        let hits: Vec<String> = ledger
            .all_paths()
            .into_iter()
            .filter(|p| {
                p.strip_prefix(prefix)
                    .is_some_and(|rest| rest.is_empty() || rest.starts_with('.') || rest.starts_with('['))
            })
            .map(str::to_string)
            .collect();
        if hits.is_empty() {
            return Err(ann.malformed(format!("ignore path `{prefix}` matches no descriptor leaf")));
        }
        for p in hits {
            ledger.ignore(p);
        }
    }
    Ok(())
}
