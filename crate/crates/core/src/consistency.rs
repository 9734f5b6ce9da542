//! Recompute-and-compare consistency between a descriptor and a diagram.
//!
//! A diagram is consistent with a descriptor when re-emitting the descriptor
//! with the options recorded in the diagram's header reproduces the diagram
//! byte for byte. The semantic mode compares only node and edge statements,
//! so diagrams reformatted or reordered by hand still pass.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use crate::backend::parse::{detect_format, parse_diagram, parse_header};
use crate::backend::{emit, EmitOptions, Format};
use crate::coverage::CoverageLedger;
use crate::error::{Error, Result};
use crate::frontend::digest;
use crate::pipeline::{load, LoadOptions, Loaded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Bytes,
    Semantic,
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub mode: Mode,
    /// Diagram format; recovered from the header or extension when absent.
    pub format: Option<Format>,
    pub load: LoadOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyVerdict {
    pub consistent: bool,
    pub mode: Mode,
    pub format: Format,
    pub options: EmitOptions,
    pub expected_digest: String,
    pub actual_digest: String,
    /// First 1-based line where the texts differ (byte mode), or the first
    /// line of a statement the expected diagram lacks (semantic mode).
    pub first_divergence: Option<usize>,
    pub expected_line: Option<String>,
    pub actual_line: Option<String>,
    /// Semantic mode: statements present on one side only.
    pub missing: Vec<String>,
    pub unexpected: Vec<String>,
}

/// First differing line between two texts, 1-based, with both sides.
pub fn first_divergence(expected: &str, actual: &str) -> Option<(usize, Option<String>, Option<String>)> {
    if expected == actual {
        return None;
    }
    let mut e = expected.split_inclusive('\n');
    let mut a = actual.split_inclusive('\n');
    let mut line = 1;
    loop {
        match (e.next(), a.next()) {
            (Some(x), Some(y)) if x == y => line += 1,
            (x, y) => {
                let clean = |s: &str| s.trim_end_matches('\n').to_string();
                return Some((line, x.map(clean), y.map(clean)));
            }
        }
    }
}

pub fn check(descriptor: &Path, diagram: &Path, opts: &CheckOptions) -> Result<ConsistencyVerdict> {
    let loaded = load(descriptor, &opts.load)?;
    let text = std::fs::read_to_string(diagram).map_err(|e| Error::Io(e).in_file(diagram.display().to_string()))?;
    check_loaded(&loaded, &text, Some(diagram), opts)
}

pub fn check_loaded(
    loaded: &Loaded,
    diagram: &str,
    path: Option<&Path>,
    opts: &CheckOptions,
) -> Result<ConsistencyVerdict> {
    let header = parse_header(diagram);
    let format = opts.format.or_else(|| detect_format(path, diagram)).ok_or_else(|| {
        Error::FormatUnknown("diagram has no header and no recognized extension (.dsl, .mmd, .dot)".into())
    })?;
    let options = header.map(|(_, o)| o).unwrap_or_default();
    let expected = emit(&loaded.meta, &options, format)?;

    let mut verdict = ConsistencyVerdict {
        consistent: expected.text == diagram,
        mode: opts.mode,
        format,
        options,
        expected_digest: expected.digest.clone(),
        actual_digest: digest(diagram),
        first_divergence: None,
        expected_line: None,
        actual_line: None,
        missing: Vec::new(),
        unexpected: Vec::new(),
    };
    match opts.mode {
        Mode::Bytes => {
            if let Some((line, e, a)) = first_divergence(&expected.text, diagram) {
                verdict.first_divergence = Some(line);
                verdict.expected_line = e;
                verdict.actual_line = a;
            }
        }
        Mode::Semantic => {
            let want = parse_diagram(format, &expected.text);
            let got = parse_diagram(format, diagram);
            let statements = |g: &crate::backend::DiagramGraph| -> BTreeSet<String> {
                g.nodes
                    .iter()
                    .map(|(id, s)| format!("node {id}: {s}"))
                    .chain(g.edges.iter().map(|(f, t, l)| format!("edge {f} -> {t} [{l}]")))
                    .collect()
            };
            let (w, g) = (statements(&want), statements(&got));
            verdict.missing = w.difference(&g).cloned().collect();
            verdict.unexpected = g.difference(&w).cloned().collect();
            verdict.consistent = want.same_graph(&got);
            if !verdict.consistent {
                verdict.expected_line = verdict.missing.first().cloned();
                verdict.actual_line = verdict.unexpected.first().cloned();
                verdict.first_divergence = first_divergence(&expected.text, diagram).map(|d| d.0);
            }
        }
    }
    Ok(verdict)
}

/// Coverage ledger of a descriptor, annotations applied.
pub fn coverage(descriptor: &Path, opts: &LoadOptions) -> Result<CoverageLedger> {
    Ok(load(descriptor, opts)?.ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::load_text;

    const COMPOSE: &str =
        "services:\n  web:\n    image: nginx:latest\n    depends_on: [api]\n  api:\n    image: x/api:1\n";

    fn loaded() -> Loaded {
        load_text("c.yml", None, COMPOSE, &[], None).unwrap()
    }

    #[test]
    fn fresh_emission_is_consistent() {
        let l = loaded();
        for format in Format::ALL {
            let doc = emit(&l.meta, &EmitOptions::default(), format).unwrap();
            let v = check_loaded(&l, &doc.text, None, &CheckOptions::default()).unwrap();
            assert!(v.consistent, "{format}");
            assert_eq!(v.expected_digest, v.actual_digest);
            assert_eq!(v.first_divergence, None);
        }
    }

    #[test]
    fn recorded_options_are_reused() {
        let l = loaded();
        let opts = EmitOptions {
            orientation: crate::backend::Orientation::LeftRight,
            system_name: "Shop".into(),
            include_properties: false,
        };
        let doc = emit(&l.meta, &opts, Format::Mermaid).unwrap();
        let v = check_loaded(&l, &doc.text, None, &CheckOptions::default()).unwrap();
        assert!(v.consistent);
        assert_eq!(v.options, opts);
    }

    #[test]
    fn deleted_line_is_reported() {
        let l = loaded();
        let doc = emit(&l.meta, &EmitOptions::default(), Format::Dot).unwrap();
        let lines: Vec<&str> = doc.text.lines().collect();
        let at = lines.iter().position(|s| s.trim_start().starts_with("api [")).unwrap();
        let mut tampered: Vec<&str> = lines.clone();
        tampered.remove(at);
        let tampered = tampered.join("\n") + "\n";
        let v = check_loaded(&l, &tampered, None, &CheckOptions::default()).unwrap();
        assert!(!v.consistent);
        assert_eq!(v.first_divergence, Some(at + 1));
        assert_ne!(v.expected_digest, v.actual_digest);
    }

    #[test]
    fn semantic_mode_tolerates_layout_edits() {
        let l = loaded();
        let doc = emit(&l.meta, &EmitOptions::default(), Format::Structurizr).unwrap();
        let edited = doc
            .text
            .replace("autoLayout tb", "autoLayout lr")
            .replace("            ", "    ");
        let bytes = check_loaded(&l, &edited, None, &CheckOptions::default()).unwrap();
        assert!(!bytes.consistent);
        let opts = CheckOptions {
            mode: Mode::Semantic,
            ..Default::default()
        };
        let semantic = check_loaded(&l, &edited, None, &opts).unwrap();
        assert!(semantic.consistent, "{semantic:?}");

        let no_edge = doc.text.replace("            web -> api \"depends_on\"\n", "");
        let v = check_loaded(&l, &no_edge, None, &opts).unwrap();
        assert!(!v.consistent);
        assert_eq!(v.missing, vec!["edge web -> api [depends_on]".to_string()]);
    }

    #[test]
    fn unknown_format_without_header() {
        let err = check_loaded(&loaded(), "hello\n", None, &CheckOptions::default()).unwrap_err();
        assert!(matches!(err, Error::FormatUnknown(_)));
    }

    #[test]
    fn divergence_positions() {
        assert_eq!(first_divergence("a\nb\n", "a\nb\n"), None);
        assert_eq!(first_divergence("a\nb\n", "a\nc\n").unwrap().0, 2);
        assert_eq!(first_divergence("a\nb\n", "a\n").unwrap(), (2, Some("b".into()), None));
        assert_eq!(first_divergence("a\n", "a").unwrap().0, 1);
    }
}
