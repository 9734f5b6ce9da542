//! Descriptor frontends: each reads one descriptor language and maps it onto
//! the meta-descriptor, ledgering what it could not map.

use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::Deserialize;
use serde_yaml::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{DescriptorKind, MetaDescriptor, SourceInfo};

pub mod compose;
pub mod kubernetes;
pub mod terraform;

pub use compose::{compose_to_meta, parse_compose, ComposeModel};
pub use kubernetes::{k8s_to_meta, parse_manifests, K8sModel};
pub use terraform::{parse_tf_json, tf_to_meta, TfModel};

use crate::coverage::CoverageLedger;

/// Hex SHA-256 of `text`.
pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// True for keys whose values must not be copied into the model
/// (passwords, secrets, tokens, keys).
pub fn is_secret_key(key: &str) -> bool {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(password|secret|token|key)").unwrap())
        .is_match(key)
}

pub(crate) fn source_info(kind: DescriptorKind, digest: &str) -> SourceInfo {
    SourceInfo {
        kind,
        digest: digest.to_string(),
    }
}

/// Whole-line `#` comments as (1-based line, text after the `#`).
pub(crate) fn comment_lines(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| l.trim_start().strip_prefix('#').map(|rest| (i + 1, rest.to_string())))
        .collect()
}

pub(crate) fn check_dependency_cycles(meta: &MetaDescriptor) -> Result<()> {
    match meta.dependency_cycles().into_iter().next() {
        Some(cycle) => Err(Error::DependencyCycle { cycle }),
        None => Ok(()),
    }
}

/// Detects which frontend reads a descriptor: `.tf.json` files are
/// Terraform; otherwise YAML with top-level `services` is Compose and YAML
/// with `apiVersion` and `kind` is Kubernetes.
pub fn detect(path: Option<&Path>, text: &str) -> Result<DescriptorKind> {
    let name = path
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_default();
    if name.ends_with(".tf.json") {
        return Ok(DescriptorKind::Terraform);
    }
    if name.ends_with(".tf") {
        return Err(Error::FormatUnknown(format!(
            "{name}: HCL is not supported; convert the configuration to JSON syntax (.tf.json)"
        )));
    }
    let first = serde_yaml::Deserializer::from_str(text)
        .map(Value::deserialize)
        .find(|doc| !matches!(doc, Ok(Value::Null)));
    let first = match first {
        Some(doc) => doc?,
        None => return Err(Error::FormatUnknown("empty descriptor".into())),
    };
    let has = |k: &str| first.as_mapping().is_some_and(|m| m.contains_key(k));
    if has("services") {
        Ok(DescriptorKind::Compose)
    } else if has("apiVersion") && has("kind") {
        Ok(DescriptorKind::Kubernetes)
    } else if has("resource") || has("module") || has("data") {
        Ok(DescriptorKind::Terraform)
    } else {
        Err(Error::FormatUnknown(
            "descriptor is neither Compose (`services`), Kubernetes (`apiVersion` + `kind`) nor Terraform JSON".into(),
        ))
    }
}

/// Output of any frontend before annotations are applied.
#[derive(Debug, Clone)]
pub struct FrontendOutput {
    pub meta: MetaDescriptor,
    pub ledger: CoverageLedger,
    pub raw_paths: Vec<String>,
}

/// Parses `text` with the frontend for `kind` and maps it.
pub fn run_frontend(kind: DescriptorKind, text: &str) -> Result<FrontendOutput> {
    let (meta, ledger, raw_paths) = match kind {
        DescriptorKind::Compose => {
            let model = parse_compose(text)?;
            let (meta, ledger) = compose_to_meta(&model)?;
            (meta, ledger, model.raw_paths)
        }
        DescriptorKind::Kubernetes => {
            let model = parse_manifests(text)?;
            let (meta, ledger) = k8s_to_meta(&model)?;
            (meta, ledger, model.raw_paths)
        }
        DescriptorKind::Terraform => {
            let model = parse_tf_json(text)?;
            let (meta, ledger) = tf_to_meta(&model)?;
            (meta, ledger, model.raw_paths)
        }
    };
    Ok(FrontendOutput {
        meta,
        ledger,
        raw_paths,
    })
}
