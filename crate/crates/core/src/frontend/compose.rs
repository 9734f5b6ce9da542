//! Docker Compose frontend.
//!
//! Each service becomes a component: the service name is its name,
//! `container_name` its type, volumes/ports/expose/networks its properties
//! and the image (or, failing that, the build context) its artifact, with
//! `deploy.replicas` alongside. Every `depends_on` entry becomes a
//! `depends_on` relation from the service to the named dependency.

use indexmap::IndexMap;
use serde_yaml::Value;

use super::{check_dependency_cycles, is_secret_key, source_info};
use crate::coverage::{CoverageLedger, UnmappedReason as R};
use crate::error::{Error, Result};
use crate::model::{Component, DescriptorKind, MetaDescriptor, PropertyValue, Relation, RelationKind};
use crate::tree::{self, entries, expect_string, get, join_index, join_key, leaves};

#[derive(Debug, Clone, PartialEq)]
pub struct ComposeModel {
    pub services: IndexMap<String, ServiceDef>,
    /// Every leaf path of the source document.
    pub raw_paths: Vec<String>,
    /// Whole-line comments as (1-based line, text after `#`).
    pub comments: Vec<(usize, String)>,
    document: Value,
    top_level: Vec<(String, Value)>,
    digest: String,
}

/// `HOST:CONTAINER` after stripping any bind address and protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortMapping {
    pub host: Option<String>,
    pub container: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ServiceDef {
    pub container_name: Option<String>,
    pub image: Option<String>,
    pub build: Option<String>,
    pub ports: Vec<PortMapping>,
    pub expose: Vec<String>,
    pub volumes: Vec<String>,
    pub networks: Vec<String>,
    pub depends_on: Vec<String>,
    pub deploy_replicas: Option<u64>,
    pub environment: IndexMap<String, Option<String>>,
    /// Keys this frontend does not map.
    pub other: Vec<String>,
    raw: Value,
}

pub fn parse_compose(text: &str) -> Result<ComposeModel> {
    let doc: Value = serde_yaml::from_str(text).map_err(duplicate_as_schema)?;
    let Some(root) = doc.as_mapping() else {
        return Err(Error::schema("services", "missing top-level `services`"));
    };
    let services_value = root
        .get("services")
        .ok_or_else(|| Error::schema("services", "missing top-level `services`"))?;

    let mut services = IndexMap::new();
    for (name, body) in entries(services_value, "services")? {
        let path = join_key("services", &name);
        let def = parse_service(body, &path)?;
        if services.insert(name.clone(), def).is_some() {
            return Err(Error::schema(path, "duplicate service name"));
        }
    }

    let mut top_level = Vec::new();
    for (key, value) in entries(&doc, "$")? {
        if key != "services" {
            top_level.push((key, value.clone()));
        }
    }

    Ok(ComposeModel {
        services,
        raw_paths: leaves(&doc, ""),
        comments: super::comment_lines(text),
        top_level,
        document: doc.clone(),
        digest: super::digest(text),
    })
}

fn duplicate_as_schema(e: serde_yaml::Error) -> Error {
    let message = e.to_string();
    if message.contains("duplicate entry") {
        Error::schema("services", message)
    } else {
        e.into()
    }
}

fn parse_service(body: &Value, path: &str) -> Result<ServiceDef> {
    let mut def = ServiceDef {
        raw: body.clone(),
        ..Default::default()
    };
    for (key, v) in entries(body, path)? {
        let at = join_key(path, &key);
        match key.as_str() {
            "container_name" => def.container_name = Some(expect_string(v, &at)?),
            "image" => def.image = Some(expect_string(v, &at)?),
            "build" => {
                def.build = Some(match v {
                    Value::Mapping(_) => match get(v, "context") {
                        Some(ctx) => expect_string(ctx, &join_key(&at, "context"))?,
                        None => ".".to_string(),
                    },
                    other => expect_string(other, &at)?,
                })
            }
            "ports" => {
                for (i, p) in tree::elements(v, &at)?.into_iter().enumerate() {
                    def.ports.push(parse_port(p, &join_index(&at, i))?);
                }
            }
            "expose" => def.expose = tree::string_list(v, &at)?,
            "volumes" => {
                for (i, vol) in tree::elements(v, &at)?.into_iter().enumerate() {
                    def.volumes.push(volume_text(vol, &join_index(&at, i))?);
                }
            }
            "networks" => {
                def.networks = match v {
                    Value::Mapping(_) => entries(v, &at)?.into_iter().map(|(k, _)| k).collect(),
                    other => tree::string_list(other, &at)?,
                }
            }
            "depends_on" => {
                def.depends_on = match v {
                    Value::Mapping(_) => entries(v, &at)?.into_iter().map(|(k, _)| k).collect(),
                    other => tree::string_list(other, &at)?,
                }
            }
            "deploy" => {
                if let Some(r) = get(v, "replicas") {
                    let rpath = join_key(&at, "replicas");
                    let text = expect_string(r, &rpath)?;
                    match text.parse::<u64>() {
                        Ok(n) if n > 0 => def.deploy_replicas = Some(n),
                        _ => {
                            return Err(Error::schema(
                                rpath,
                                format!("replicas `{text}` is not a positive integer"),
                            ))
                        }
                    }
                }
            }
            "environment" => def.environment = parse_environment(v, &at)?,
            _ => def.other.push(key),
        }
    }
    Ok(def)
}

fn parse_port(value: &Value, path: &str) -> Result<PortMapping> {
    if let Value::Mapping(_) = value {
        let target = get(value, "target").ok_or_else(|| Error::schema(path, "long-form port without `target`"))?;
        let container = expect_string(target, &join_key(path, "target"))?;
        let host = get(value, "published")
            .map(|p| expect_string(p, &join_key(path, "published")))
            .transpose()?;
        return check_port(PortMapping { host, container }, path);
    }
    let text = expect_string(value, path)?;
    let spec = text.split('/').next().unwrap_or_default();
    let parts: Vec<&str> = spec.split(':').collect();
    let mapping = match parts.as_slice() {
        [c] => PortMapping {
            host: None,
            container: c.to_string(),
        },
        [h, c] => PortMapping {
            host: Some(h.to_string()),
            container: c.to_string(),
        },
        [_ip, h, c] => PortMapping {
            host: Some(h.to_string()),
            container: c.to_string(),
        },
        _ => return Err(Error::schema(path, format!("unsupported port syntax `{text}`"))),
    };
    check_port(mapping, path)
}

fn check_port(mapping: PortMapping, path: &str) -> Result<PortMapping> {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let host_ok = mapping.host.as_deref().is_none_or(digits);
    if digits(&mapping.container) && host_ok {
        Ok(mapping)
    } else {
        let shown = match &mapping.host {
            Some(h) => format!("{h}:{}", mapping.container),
            None => mapping.container.clone(),
        };
        Err(Error::schema(
            path,
            format!("port `{shown}` is not of the form PORT or HOST:CONTAINER"),
        ))
    }
}

fn volume_text(value: &Value, path: &str) -> Result<String> {
    match value {
        Value::Mapping(_) => {
            let field = |k: &str| get(value, k).map(|v| expect_string(v, &join_key(path, k))).transpose();
            match (field("source")?, field("target")?) {
                (Some(s), Some(t)) => Ok(format!("{s}:{t}")),
                (None, Some(t)) => Ok(t),
                _ => Err(Error::schema(path, "long-form volume without `target`")),
            }
        }
        other => expect_string(other, path),
    }
}

fn parse_environment(value: &Value, path: &str) -> Result<IndexMap<String, Option<String>>> {
    let mut env = IndexMap::new();
    match value {
        Value::Mapping(_) => {
            for (k, v) in entries(value, path)? {
                let at = join_key(path, &k);
                let val = match v {
                    Value::Null => None,
                    other => Some(tree::expect_scalar(other, &at)?),
                };
                env.insert(k, val);
            }
        }
        other => {
            for (i, item) in tree::elements(other, path)?.into_iter().enumerate() {
                let text = expect_string(item, &join_index(path, i))?;
                match text.split_once('=') {
                    Some((k, v)) => env.insert(k.to_string(), Some(v.to_string())),
                    None => env.insert(text, None),
                };
            }
        }
    }
    Ok(env)
}

/// Maps a parsed Compose file onto a meta-descriptor and accounts for every
/// source leaf in the returned ledger.
pub fn compose_to_meta(model: &ComposeModel) -> Result<(MetaDescriptor, CoverageLedger)> {
    let mut meta = MetaDescriptor {
        source: Some(source_info(DescriptorKind::Compose, &model.digest)),
        ..Default::default()
    };
    let mut ledger = CoverageLedger::default();

    for (name, def) in &model.services {
        let path = join_key("services", name);
        meta.components.push(service_component(name, def));
        classify_service(def, &path, &mut ledger)?;
        if def.image.is_none() && def.build.is_none() {
            ledger.note(&path, "no artifact source (neither image nor build)");
        }
    }

    for (name, def) in &model.services {
        for dep in &def.depends_on {
            if !model.services.contains_key(dep) {
                return Err(Error::UnknownDependency {
                    from: name.clone(),
                    to: dep.clone(),
                });
            }
            meta.relations.insert(Relation::new(name, dep, RelationKind::DependsOn));
        }
    }
    check_dependency_cycles(&meta)?;

    for (key, value) in &model.top_level {
        ledger.unmap_all(leaves(value, &join_key("", key)), R::TopLevelDefinition);
    }
    for (path, value) in tree::leaf_values(&model.document, "") {
        if value.as_str().is_some_and(|s| s.contains("${")) {
            ledger.note(path, "variable interpolation left literal");
        }
    }
    ledger.close(&model.raw_paths);
    Ok((meta, ledger))
}

fn service_component(name: &str, def: &ServiceDef) -> Component {
    let mut c = Component::new(name, name);
    c.component_type = def.container_name.clone();

    let mut put = |key: &str, values: Vec<String>| {
        if !values.is_empty() {
            c.properties
                .insert(key.to_string(), PropertyValue::for_key(key, values));
        }
    };
    put("volumes", def.volumes.clone());
    put("targetPort", def.ports.iter().map(|p| p.container.clone()).collect());
    put("expose", def.expose.clone());
    put("networks", def.networks.clone());
    put(
        "environment",
        def.environment
            .iter()
            .filter(|(k, _)| !is_secret_key(k))
            .map(|(k, v)| match v {
                Some(v) => format!("{k}={v}"),
                None => k.clone(),
            })
            .collect(),
    );

    if let Some(image) = &def.image {
        c.artifacts.insert("image".into(), image.clone());
    } else if let Some(build) = &def.build {
        c.artifacts.insert("build".into(), build.clone());
    }
    if let Some(n) = def.deploy_replicas {
        c.artifacts.insert("replicas".into(), n.to_string());
    }
    c
}

fn classify_service(def: &ServiceDef, path: &str, ledger: &mut CoverageLedger) -> Result<()> {
    if !def.raw.is_mapping() {
        // `name:` with no body
        ledger.map(path.to_string());
        return Ok(());
    }
    for (key, v) in entries(&def.raw, path)? {
        let at = join_key(path, &key);
        match key.as_str() {
            "container_name" | "image" | "expose" => ledger.map_all(leaves(v, &at)),
            "build" if def.image.is_some() => ledger.unmap_all(leaves(v, &at), R::ShadowedByImage),
            "build" => match v {
                Value::Mapping(_) => {
                    for leaf in leaves(v, &at) {
                        if leaf == join_key(&at, "context") {
                            ledger.map(leaf);
                        } else {
                            ledger.unmap(leaf, R::BuildDetail);
                        }
                    }
                }
                _ => ledger.map_all(leaves(v, &at)),
            },
            "ports" => classify_entries(v, &at, &["target"], R::PortDetail, ledger, |i, leaf| {
                if let Some(host) = &def.ports[i].host {
                    ledger_note_host(leaf, host)
                } else {
                    None
                }
            }),
            "volumes" => classify_entries(v, &at, &["source", "target"], R::VolumeDetail, ledger, |_, _| None),
            "networks" | "depends_on" => {
                let detail = if key == "networks" {
                    R::NetworkDetail
                } else {
                    R::DependencyCondition
                };
                match v {
                    Value::Mapping(_) => {
                        for (name, body) in entries(v, &at)? {
                            let npath = join_key(&at, &name);
                            if body.is_mapping() || body.is_sequence() {
                                ledger.unmap_all(leaves(body, &npath), detail);
                            } else {
                                ledger.map(npath);
                            }
                        }
                    }
                    other => ledger.map_all(leaves(other, &at)),
                }
            }
            "deploy" => {
                let replicas = join_key(&at, "replicas");
                for leaf in leaves(v, &at) {
                    if leaf == replicas {
                        ledger.map(leaf);
                    } else {
                        ledger.unmap(leaf, R::Operational);
                    }
                }
            }
            "environment" => match v {
                Value::Mapping(_) => {
                    for (k, body) in entries(v, &at)? {
                        let epath = join_key(&at, &k);
                        if is_secret_key(&k) {
                            ledger.unmap_all(leaves(body, &epath), R::RedactedSecret);
                        } else {
                            ledger.map_all(leaves(body, &epath));
                        }
                    }
                }
                other => {
                    for (i, item) in tree::elements(other, &at)?.into_iter().enumerate() {
                        let text = tree::scalar_text(item).unwrap_or_default();
                        let k = text.split('=').next().unwrap_or_default();
                        let epath = join_index(&at, i);
                        if is_secret_key(k) {
                            ledger.unmap(epath, R::RedactedSecret);
                        } else {
                            ledger.map(epath);
                        }
                    }
                }
            },
            "restart" | "healthcheck" | "logging" => ledger.unmap_all(leaves(v, &at), R::Operational),
            _ => ledger.unmap_all(leaves(v, &at), R::UnsupportedDirective),
        }
    }
    Ok(())
}

fn ledger_note_host(leaf: &str, host: &str) -> Option<(String, String)> {
    Some((leaf.to_string(), format!("host port {host} not mapped")))
}

/// Sequence entries that are scalars map whole; long-form mapping entries map
/// only the `keep` fields and ledger the rest under `detail`.
fn classify_entries(
    value: &Value,
    path: &str,
    keep: &[&str],
    detail: R,
    ledger: &mut CoverageLedger,
    note: impl Fn(usize, &str) -> Option<(String, String)>,
) {
    let Some(seq) = value.as_sequence() else {
        ledger.map_all(leaves(value, path));
        return;
    };
    for (i, item) in seq.iter().enumerate() {
        let ipath = join_index(path, i);
        if let Some((p, msg)) = note(i, &ipath) {
            ledger.note(p, msg);
        }
        if item.is_mapping() {
            let kept: Vec<String> = keep.iter().map(|k| join_key(&ipath, k)).collect();
            for leaf in leaves(item, &ipath) {
                if kept.contains(&leaf) {
                    ledger.map(leaf);
                } else {
                    ledger.unmap(leaf, detail);
                }
            }
        } else {
            ledger.map_all(leaves(item, &ipath));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIMPLE_API_COMPOSE: &str = "services:
  simple-api:
    container_name: api
    image: emondek/simple-api:1.0.0
    ports:
      - \"3000:3000\"
";

    #[test]
    fn reads_single_service() {
        let model = parse_compose(SIMPLE_API_COMPOSE).unwrap();
        let api = &model.services["simple-api"];
        assert_eq!(api.container_name.as_deref(), Some("api"));
        assert_eq!(api.image.as_deref(), Some("emondek/simple-api:1.0.0"));
        assert_eq!(
            api.ports,
            vec![PortMapping {
                host: Some("3000".into()),
                container: "3000".into()
            }]
        );
    }

    #[test]
    fn empty_services() {
        let model = parse_compose("services: {}\n").unwrap();
        assert!(model.services.is_empty());
        let (meta, ledger) = compose_to_meta(&model).unwrap();
        assert!(meta.components.is_empty());
        assert!(ledger.is_empty());
    }

    #[test]
    fn missing_services_is_schema_error() {
        assert!(matches!(parse_compose("version: '3'\n"), Err(Error::Schema { .. })));
        assert!(matches!(parse_compose(""), Err(Error::Schema { .. })));
    }

    #[test]
    fn duplicate_service_is_schema_error() {
        let text = "services:\n  a:\n    image: x\n  a:\n    image: y\n";
        assert!(matches!(parse_compose(text), Err(Error::Schema { .. })));
    }

    #[test]
    fn image_beats_build() {
        let text = "services:\n  a:\n    image: x:1\n    build: ./a\n  b:\n    build:\n      context: ./b\n      dockerfile: Dockerfile.dev\n";
        let (meta, ledger) = compose_to_meta(&parse_compose(text).unwrap()).unwrap();
        assert_eq!(meta.components[0].artifacts["image"], "x:1");
        assert_eq!(meta.components[1].artifacts["build"], "./b");
        assert_eq!(ledger.unmapped["services.a.build"], R::ShadowedByImage);
        assert!(ledger.mapped.contains("services.b.build.context"));
        assert_eq!(ledger.unmapped["services.b.build.dockerfile"], R::BuildDetail);
    }

    #[test]
    fn no_artifact_source_is_noted() {
        let (meta, ledger) = compose_to_meta(&parse_compose("services:\n  a:\n    expose: [80]\n").unwrap()).unwrap();
        assert!(meta.components[0].artifacts.is_empty());
        assert!(ledger.notes.iter().any(|n| n.message.contains("no artifact source")));
    }

    #[test]
    fn port_forms() {
        let text = "services:\n  a:\n    image: x\n    ports:\n      - 80\n      - \"127.0.0.1:8080:80/tcp\"\n      - target: 443\n        published: 8443\n";
        let (meta, ledger) = compose_to_meta(&parse_compose(text).unwrap()).unwrap();
        assert_eq!(
            meta.components[0].properties["targetPort"],
            PropertyValue::List(vec!["80".into(), "80".into(), "443".into()])
        );
        assert!(ledger.mapped.contains("services.a.ports[2].target"));
        assert_eq!(ledger.unmapped["services.a.ports[2].published"], R::PortDetail);
    }

    #[test]
    fn port_ranges_rejected() {
        let text = "services:\n  a:\n    ports: [\"3000-3005:3000-3005\"]\n";
        assert!(matches!(parse_compose(text), Err(Error::Schema { path, .. }) if path == "services.a.ports[0]"));
    }

    #[test]
    fn secrets_are_redacted() {
        let text = "services:\n  db:\n    image: postgres\n    environment:\n      POSTGRES_USER: app\n      POSTGRES_PASSWORD: hunter2\n  api:\n    image: x\n    environment:\n      - API_TOKEN=abc\n      - MODE=prod\n";
        let (meta, ledger) = compose_to_meta(&parse_compose(text).unwrap()).unwrap();
        assert_eq!(
            meta.components[0].properties["environment"],
            PropertyValue::List(vec!["POSTGRES_USER=app".into()])
        );
        assert_eq!(
            meta.components[1].properties["environment"],
            PropertyValue::List(vec!["MODE=prod".into()])
        );
        assert_eq!(
            ledger.unmapped["services.db.environment.POSTGRES_PASSWORD"],
            R::RedactedSecret
        );
        assert_eq!(ledger.unmapped["services.api.environment[0]"], R::RedactedSecret);
        let text_out = crate::model::serialize_canonical(&meta).unwrap();
        assert!(!text_out.contains("hunter2") && !text_out.contains("abc"));
    }

    #[test]
    fn long_form_depends_on() {
        let text = "services:\n  a:\n    image: x\n    depends_on:\n      b:\n        condition: service_healthy\n  b:\n    image: y\n";
        let (meta, ledger) = compose_to_meta(&parse_compose(text).unwrap()).unwrap();
        assert!(meta.has_relation("a", "b", RelationKind::DependsOn));
        assert_eq!(
            ledger.unmapped["services.a.depends_on.b.condition"],
            R::DependencyCondition
        );
    }

    #[test]
    fn unknown_dependency() {
        let text = "services:\n  a:\n    depends_on: [ghost]\n";
        assert!(matches!(
            compose_to_meta(&parse_compose(text).unwrap()),
            Err(Error::UnknownDependency { from, to }) if from == "a" && to == "ghost"
        ));
    }

    #[test]
    fn dependency_cycle() {
        let text = "services:\n  a:\n    depends_on: [b]\n  b:\n    depends_on: [a]\n";
        assert!(matches!(
            compose_to_meta(&parse_compose(text).unwrap()),
            Err(Error::DependencyCycle { cycle }) if cycle == ["a", "b", "a"]
        ));
    }

    #[test]
    fn replicas_must_be_positive() {
        let text = "services:\n  a:\n    deploy:\n      replicas: 0\n";
        assert!(matches!(parse_compose(text), Err(Error::Schema { .. })));
    }

    #[test]
    fn interpolation_kept_literal_and_noted() {
        let text = "services:\n  a:\n    image: \"app:${TAG}\"\n";
        let (meta, ledger) = compose_to_meta(&parse_compose(text).unwrap()).unwrap();
        assert_eq!(meta.components[0].artifacts["image"], "app:${TAG}");
        assert!(ledger.notes.iter().any(|n| n.path == "services.a.image"));
    }

    #[test]
    fn operational_and_top_level_unmapped() {
        let text =
            "version: '3.8'\nservices:\n  a:\n    image: x\n    restart: always\n    command: run\nvolumes:\n  data:\n";
        let (_, ledger) = compose_to_meta(&parse_compose(text).unwrap()).unwrap();
        assert_eq!(ledger.unmapped["services.a.restart"], R::Operational);
        assert_eq!(ledger.unmapped["services.a.command"], R::UnsupportedDirective);
        assert_eq!(ledger.unmapped["version"], R::TopLevelDefinition);
        assert_eq!(ledger.unmapped["volumes.data"], R::TopLevelDefinition);
    }
}
