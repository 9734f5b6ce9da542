//! Accounting of which descriptor leaves reached the meta-descriptor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

/// Why a leaf did not reach the meta-descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnmappedReason {
    /// Environment entry whose key looks like a credential.
    RedactedSecret,
    /// Restart policy, health check, logging, deploy tuning.
    Operational,
    /// `build` given alongside `image`.
    ShadowedByImage,
    BuildDetail,
    DependencyCondition,
    PortDetail,
    VolumeDetail,
    NetworkDetail,
    /// Top-level `volumes`, `networks`, `secrets`, `version`, `x-*` blocks.
    TopLevelDefinition,
    /// Key not recognized by the frontend.
    UnsupportedDirective,
    /// Kubernetes object kind other than Pod, Deployment, Service.
    UnsupportedKind,
    /// Container fields other than image and ports.
    ContainerDetail,
    WorkloadSelector,
    ObjectMetadata,
    ResourceArgument,
    ProviderAlias,
    UnreferencedDataSource,
    /// Leaf never classified by any rule.
    Unrecognized,
}

impl UnmappedReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UnmappedReason::RedactedSecret => "redacted-secret",
            UnmappedReason::Operational => "operational",
            UnmappedReason::ShadowedByImage => "shadowed-by-image",
            UnmappedReason::BuildDetail => "build-detail",
            UnmappedReason::DependencyCondition => "dependency-condition",
            UnmappedReason::PortDetail => "port-detail",
            UnmappedReason::VolumeDetail => "volume-detail",
            UnmappedReason::NetworkDetail => "network-detail",
            UnmappedReason::TopLevelDefinition => "top-level-definition",
            UnmappedReason::UnsupportedDirective => "unsupported-directive",
            UnmappedReason::UnsupportedKind => "unsupported-kind",
            UnmappedReason::ContainerDetail => "container-detail",
            UnmappedReason::WorkloadSelector => "workload-selector",
            UnmappedReason::ObjectMetadata => "object-metadata",
            UnmappedReason::ResourceArgument => "resource-argument",
            UnmappedReason::ProviderAlias => "provider-alias",
            UnmappedReason::UnreferencedDataSource => "unreferenced-data-source",
            UnmappedReason::Unrecognized => "unrecognized",
        }
    }
}

impl fmt::Display for UnmappedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Observation below leaf granularity (host side of a port mapping, an
/// unresolved `${...}` expression, a selector that matched nothing).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Note {
    pub path: String,
    pub message: String,
}

/// Partition of a descriptor's leaf paths into mapped, unmapped and ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CoverageLedger {
    pub mapped: BTreeSet<String>,
    pub unmapped: BTreeMap<String, UnmappedReason>,
    pub ignored: BTreeSet<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<Note>,
}

impl CoverageLedger {
    /// Each classification moves the path out of the other two sets.
    pub fn map(&mut self, path: impl Into<String>) {
        let path = path.into();
        self.unmapped.remove(&path);
        self.ignored.remove(&path);
        self.mapped.insert(path);
    }

    pub fn unmap(&mut self, path: impl Into<String>, reason: UnmappedReason) {
        let path = path.into();
        self.mapped.remove(&path);
        self.ignored.remove(&path);
        self.unmapped.insert(path, reason);
    }

    pub fn ignore(&mut self, path: impl Into<String>) {
        let path = path.into();
        self.mapped.remove(&path);
        self.unmapped.remove(&path);
        self.ignored.insert(path);
    }

    pub fn map_all<I: IntoIterator<Item = String>>(&mut self, paths: I) {
        for p in paths {
            self.map(p);
        }
    }

    pub fn unmap_all<I: IntoIterator<Item = String>>(&mut self, paths: I, reason: UnmappedReason) {
        for p in paths {
            self.unmap(p, reason);
        }
    }

    pub fn note(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.notes.push(Note {
            path: path.into(),
            message: message.into(),
        });
    }

    /// Restricts the ledger to `raw_paths`, classifying any leftover leaf as
    /// unrecognized, and sorts the notes.
    pub fn close(&mut self, raw_paths: &[String]) {
        let raw: BTreeSet<&str> = raw_paths.iter().map(String::as_str).collect();
        self.mapped.retain(|p| raw.contains(p.as_str()));
        self.unmapped.retain(|p, _| raw.contains(p.as_str()));
        self.ignored.retain(|p| raw.contains(p.as_str()));
        for p in raw_paths {
            if !self.contains(p) {
                self.unmapped.insert(p.clone(), UnmappedReason::Unrecognized);
            }
        }
        self.notes.sort();
        self.notes.dedup();
    }

    pub fn contains(&self, path: &str) -> bool {
        self.mapped.contains(path) || self.unmapped.contains_key(path) || self.ignored.contains(path)
    }

    pub fn len(&self) -> usize {
        self.mapped.len() + self.unmapped.len() + self.ignored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every path the ledger accounts for.
    pub fn all_paths(&self) -> BTreeSet<&str> {
        self.mapped
            .iter()
            .chain(self.unmapped.keys())
            .chain(self.ignored.iter())
            .map(String::as_str)
            .collect()
    }

    /// Checks that the three sets are disjoint and together equal
    /// `raw_paths`. Returns the offending paths otherwise.
    pub fn check_partition(&self, raw_paths: &[String]) -> std::result::Result<(), Vec<String>> {
        let mut bad = BTreeSet::new();
        for p in &self.mapped {
            if self.unmapped.contains_key(p) || self.ignored.contains(p) {
                bad.insert(p.clone());
            }
        }
        for p in self.unmapped.keys() {
            if self.ignored.contains(p) {
                bad.insert(p.clone());
            }
        }
        let raw: BTreeSet<&str> = raw_paths.iter().map(String::as_str).collect();
        let ours = self.all_paths();
        bad.extend(raw.symmetric_difference(&ours).map(|s| s.to_string()));
        if bad.is_empty() {
            Ok(())
        } else {
            Err(bad.into_iter().collect())
        }
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("ledger serialization")
    }
}
