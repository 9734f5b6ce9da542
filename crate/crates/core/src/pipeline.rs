//! Descriptor loading: frontend, annotations, coverage.
//!
//! Annotations are gathered from the descriptor's own comments (YAML only),
//! from a sidecar `<descriptor>.arch` next to it when present, and from any
//! extra files the caller names, in that order.

use std::path::{Path, PathBuf};

use crate::annotations::{apply_annotations, apply_ignores, extract_annotations, extract_sidecar, Annotation};
use crate::coverage::CoverageLedger;
use crate::error::{Error, Result};
use crate::frontend::{detect, run_frontend};
use crate::model::{DescriptorKind, MetaDescriptor};
use crate::tree::locate;

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Skips auto-detection.
    pub frontend: Option<DescriptorKind>,
    /// Extra annotation files, read like a sidecar.
    pub annotations: Vec<PathBuf>,
    /// Skips the `<descriptor>.arch` sidecar.
    pub no_sidecar: bool,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub kind: DescriptorKind,
    pub meta: MetaDescriptor,
    pub ledger: CoverageLedger,
    pub raw_paths: Vec<String>,
    pub annotations: Vec<Annotation>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".arch");
    PathBuf::from(s)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(e).in_file(path.display().to_string()))
}

/// Line in `text` that a frontend error most likely refers to.
fn error_line(e: &Error, text: &str) -> Option<usize> {
    match e {
        Error::Schema { path, .. } => locate(text, path),
        Error::UnknownDependency { from, to } => {
            let from_line = locate(text, from)?;
            text.lines()
                .enumerate()
                .skip(from_line)
                .find(|(_, l)| l.contains(to.as_str()))
                .map(|(i, _)| i + 1)
                .or(Some(from_line))
        }
        Error::DependencyCycle { cycle } => cycle.first().and_then(|id| locate(text, id)),
        _ => None,
    }
}

pub fn load(path: &Path, opts: &LoadOptions) -> Result<Loaded> {
    let text = read(path)?;
    let mut extra = Vec::new();
    let sidecar = sidecar_path(path);
    if !opts.no_sidecar && sidecar.is_file() {
        extra.push(sidecar);
    }
    extra.extend(opts.annotations.iter().cloned());
    let mut sidecars = Vec::new();
    for p in &extra {
        sidecars.push((p.display().to_string(), read(p)?));
    }
    load_text(&path.display().to_string(), Some(path), &text, &sidecars, opts.frontend)
}

/// Loads descriptor `text`; `label` names it in diagnostics and `sidecars`
/// holds (label, text) of annotation files.
pub fn load_text(
    label: &str,
    path: Option<&Path>,
    text: &str,
    sidecars: &[(String, String)],
    frontend: Option<DescriptorKind>,
) -> Result<Loaded> {
    let at = |e: Error| {
        let line = error_line(&e, text);
        e.in_file_at(label, line)
    };
    let kind = match frontend {
        Some(k) => k,
        None => detect(path, text).map_err(at)?,
    };
    let out = run_frontend(kind, text).map_err(at)?;

    let mut annotations = Vec::new();
    if kind != DescriptorKind::Terraform {
        annotations.extend(extract_annotations(text).map_err(at)?);
    }
    for (file, body) in sidecars {
        let mut anns = extract_sidecar(body).map_err(|e| e.in_file(file.clone()))?;
        for a in &mut anns {
            a.file = Some(file.clone());
        }
        annotations.extend(anns);
    }

    let meta = apply_annotations(out.meta, &annotations).map_err(|e| e.in_file(label))?;
    let mut ledger = out.ledger;
    apply_ignores(&mut ledger, &annotations).map_err(|e| e.in_file(label))?;
    if let Err(bad) = ledger.check_partition(&out.raw_paths) {
        return Err(Error::schema(
            "$",
            format!("coverage ledger does not partition the leaves: {}", bad.join(", ")),
        )
        .in_file(label));
    }
    Ok(Loaded {
        kind,
        meta,
        ledger,
        raw_paths: out.raw_paths,
        annotations,
    })
}
