//! Technology tags keyed by image-name prefix.

use std::path::Path;

use serde_yaml::Value;

use crate::error::{Error, Result};
use crate::tree::{entries, expect_string};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TechTable {
    entries: Vec<(String, String)>,
}

impl Default for TechTable {
    fn default() -> Self {
        TechTable::from_pairs([
            ("nginx", "web-proxy"),
            ("httpd", "web-server"),
            ("redis", "cache"),
            ("postgres", "database"),
            ("mysql", "database"),
        ])
    }
}

/// Repository part of an image reference: no registry host, tag or digest.
///
/// `docker.io/library/nginx:1.25` → `library/nginx`; `redis:6.2-alpine` → `redis`.
pub fn repository(image: &str) -> &str {
    let s = image.split('@').next().unwrap_or(image);
    let start = match s.split_once('/') {
        Some((first, _)) if is_registry_host(first) => first.len() + 1,
        _ => 0,
    };
    let last = s.rfind('/').map_or(0, |i| i + 1);
    let end = s[last..].find(':').map_or(s.len(), |i| last + i);
    &s[start..end]
}

fn is_registry_host(segment: &str) -> bool {
    segment.contains('.') || segment.contains(':') || segment == "localhost"
}

/// Whether an image comes from the official library namespace
/// (`nginx`, `library/nginx`), as opposed to a user or organisation image.
pub fn is_library_image(image: &str) -> bool {
    let repo = repository(image);
    !repo.contains('/') || repo.strip_prefix("library/").is_some_and(|r| !r.contains('/'))
}

impl TechTable {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        TechTable {
            entries: pairs.into_iter().map(|(p, t)| (p.to_string(), t.to_string())).collect(),
        }
    }

    /// Adds or replaces the tag for `prefix`.
    pub fn insert(&mut self, prefix: &str, tag: &str) {
        match self.entries.iter_mut().find(|(p, _)| p == prefix) {
            Some(entry) => entry.1 = tag.to_string(),
            None => self.entries.push((prefix.to_string(), tag.to_string())),
        }
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Distinct tags, in table order.
    pub fn tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = Vec::new();
        for (_, t) in &self.entries {
            if !tags.contains(&t.as_str()) {
                tags.push(t);
            }
        }
        tags
    }

    /// Tag for an image; the longest matching prefix of the image name wins.
    pub fn lookup(&self, image: &str) -> Option<&str> {
        let repo = repository(image);
        let name = repo.rsplit('/').next().unwrap_or(repo);
        self.entries
            .iter()
            .filter(|(p, _)| name.starts_with(p.as_str()))
            .max_by_key(|(p, _)| p.len())
            .map(|(_, t)| t.as_str())
    }

    /// Extends the default table with a YAML mapping of `prefix: tag`.
    pub fn from_yaml(text: &str) -> Result<Self> {
        let doc: Value = serde_yaml::from_str(text)?;
        let mut table = TechTable::default();
        for (prefix, tag) in entries(&doc, "$")? {
            let tag = expect_string(tag, &prefix)?;
            if prefix.is_empty() {
                return Err(Error::schema("$", "empty image prefix"));
            }
            table.insert(&prefix, &tag);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        TechTable::from_yaml(&text).map_err(|e| e.in_file(path.display().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repository_strips_tag_host_and_digest() {
        assert_eq!(repository("nginx:latest"), "nginx");
        assert_eq!(repository("redis:6.2-alpine"), "redis");
        assert_eq!(repository("emondek/simple-api:1.0.0"), "emondek/simple-api");
        assert_eq!(repository("docker.io/library/nginx:1.25"), "library/nginx");
        assert_eq!(repository("localhost:5000/app:dev"), "app");
        assert_eq!(repository("ghcr.io/org/tool@sha256:abc"), "org/tool");
    }

    #[test]
    fn library_images() {
        assert!(is_library_image("nginx:latest"));
        assert!(is_library_image("app-image:latest"));
        assert!(is_library_image("library/postgres"));
        assert!(!is_library_image("emondek/simple-api:latest"));
    }

    #[test]
    fn default_lookup() {
        let t = TechTable::default();
        assert_eq!(t.lookup("nginx:latest"), Some("web-proxy"));
        assert_eq!(t.lookup("postgres:14.1-alpine"), Some("database"));
        assert_eq!(t.lookup("redis:6.2-alpine"), Some("cache"));
        assert_eq!(t.lookup("app-image:latest"), None);
    }

    #[test]
    fn yaml_extends_defaults() {
        let t = TechTable::from_yaml("app-image: worker\nnginx: load-balancer\n").unwrap();
        assert_eq!(t.lookup("app-image:latest"), Some("worker"));
        assert_eq!(t.lookup("nginx"), Some("load-balancer"));
        assert_eq!(t.lookup("mysql:8"), Some("database"));
        assert!(TechTable::from_yaml("- a\n").is_err());
    }
}
