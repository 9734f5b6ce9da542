//! Kubernetes frontend for multi-document manifest streams.
//!
//! Pods and Deployments become deployable components, their type taken from
//! the `role` label (falling back to `app.kubernetes.io/component`). A
//! Service becomes an infrastructure component with an `exposes` relation to
//! every workload its selector matches. Kubernetes has no dependency
//! directive, so no `depends_on` relation is produced here; those come from
//! annotations.

use indexmap::IndexMap;
use serde::Deserialize;
use serde_yaml::Value;

use super::{is_secret_key, source_info};
use crate::coverage::{CoverageLedger, UnmappedReason as R};
use crate::error::{Error, Result};
use crate::model::{Component, ComponentKind, DescriptorKind, MetaDescriptor, PropertyValue, Relation, RelationKind};
use crate::tree::{self, entries, expect_string, get, join_index, join_key, leaves};

const TYPE_LABELS: &[&str] = &["role", "app.kubernetes.io/component"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectKind {
    Pod,
    Deployment,
    Service,
    /// Any other kind; retained for coverage only.
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub name: String,
    pub image: Option<String>,
    pub container_ports: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServicePort {
    pub port: Option<String>,
    pub target_port: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct K8sObject {
    pub kind: ObjectKind,
    /// The `kind` field as written.
    pub kind_name: String,
    pub name: String,
    pub namespace: Option<String>,
    pub labels: IndexMap<String, String>,
    /// Labels carried by the pods this object runs (template labels for a
    /// Deployment).
    pub pod_labels: IndexMap<String, String>,
    pub containers: Vec<Container>,
    pub volumes: Vec<String>,
    pub replicas: Option<u64>,
    pub selector: Option<IndexMap<String, String>>,
    pub service_ports: Vec<ServicePort>,
    pub service_type: Option<String>,
    /// Position in the stream, ignoring empty documents.
    pub index: usize,
    raw: Value,
}

impl K8sObject {
    fn is_workload(&self) -> bool {
        matches!(self.kind, ObjectKind::Pod | ObjectKind::Deployment)
    }

    fn base_id(&self) -> String {
        match self.namespace.as_deref() {
            Some(ns) if ns != "default" => format!("{ns}/{}", self.name),
            _ => self.name.clone(),
        }
    }

    fn same_namespace(&self, other: &K8sObject) -> bool {
        let ns = |o: &K8sObject| o.namespace.clone().unwrap_or_else(|| "default".into());
        ns(self) == ns(other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct K8sModel {
    pub objects: Vec<K8sObject>,
    pub raw_paths: Vec<String>,
    pub comments: Vec<(usize, String)>,
    digest: String,
}

pub fn parse_manifests(text: &str) -> Result<K8sModel> {
    let mut objects: Vec<K8sObject> = Vec::new();
    let mut raw_paths = Vec::new();
    for doc in serde_yaml::Deserializer::from_str(text) {
        let value = Value::deserialize(doc)?;
        if value.is_null() {
            continue;
        }
        let index = objects.len();
        let prefix = join_index("", index);
        let object = parse_object(value, &prefix, index)?;
        if objects
            .iter()
            .any(|o| o.kind_name == object.kind_name && o.name == object.name && o.namespace == object.namespace)
        {
            return Err(Error::schema(
                join_key(&prefix, "metadata"),
                format!("duplicate {} `{}`", object.kind_name, object.name),
            ));
        }
        raw_paths.extend(leaves(&object.raw, &prefix));
        objects.push(object);
    }
    Ok(K8sModel {
        objects,
        raw_paths,
        comments: super::comment_lines(text),
        digest: super::digest(text),
    })
}

fn string_map(value: Option<&Value>, path: &str) -> Result<IndexMap<String, String>> {
    let mut out = IndexMap::new();
    if let Some(v) = value {
        for (k, item) in entries(v, path)? {
            let at = join_key(path, &k);
            out.insert(k, tree::expect_scalar(item, &at)?);
        }
    }
    Ok(out)
}

fn parse_object(raw: Value, prefix: &str, index: usize) -> Result<K8sObject> {
    if !raw.is_mapping() {
        return Err(Error::schema(prefix, "document is not a mapping"));
    }
    let field = |k: &str| {
        get(&raw, k)
            .ok_or_else(|| Error::schema(join_key(prefix, k), "missing required field"))
            .and_then(|v| expect_string(v, &join_key(prefix, k)))
    };
    field("apiVersion")?;
    let kind_name = field("kind")?;
    let meta_path = join_key(prefix, "metadata");
    let metadata = get(&raw, "metadata");
    let name = metadata
        .and_then(|m| get(m, "name"))
        .ok_or_else(|| Error::schema(join_key(&meta_path, "name"), "missing required field"))
        .and_then(|v| expect_string(v, &join_key(&meta_path, "name")))?;
    let namespace = metadata
        .and_then(|m| get(m, "namespace"))
        .map(|v| expect_string(v, &join_key(&meta_path, "namespace")))
        .transpose()?;
    let labels = string_map(metadata.and_then(|m| get(m, "labels")), &join_key(&meta_path, "labels"))?;

    let kind = match kind_name.as_str() {
        "Pod" => ObjectKind::Pod,
        "Deployment" => ObjectKind::Deployment,
        "Service" => ObjectKind::Service,
        _ => ObjectKind::Other,
    };

    let mut object = K8sObject {
        kind,
        kind_name,
        name,
        namespace,
        pod_labels: IndexMap::new(),
        labels,
        containers: Vec::new(),
        volumes: Vec::new(),
        replicas: None,
        selector: None,
        service_ports: Vec::new(),
        service_type: None,
        index,
        raw: Value::Null,
    };

    let spec_path = join_key(prefix, "spec");
    let spec = get(&raw, "spec");
    match kind {
        ObjectKind::Pod => {
            object.pod_labels = object.labels.clone();
            if let Some(spec) = spec {
                read_pod_spec(&mut object, spec, &spec_path)?;
            }
        }
        ObjectKind::Deployment => {
            if let Some(spec) = spec {
                if let Some(r) = get(spec, "replicas") {
                    let at = join_key(&spec_path, "replicas");
                    let text = expect_string(r, &at)?;
                    object.replicas =
                        Some(text.parse::<u64>().ok().filter(|n| *n > 0).ok_or_else(|| {
                            Error::schema(at, format!("replicas `{text}` is not a positive integer"))
                        })?);
                }
                let tpl_path = join_key(&spec_path, "template");
                if let Some(tpl) = get(spec, "template") {
                    let tmeta = join_key(&tpl_path, "metadata");
                    object.pod_labels = string_map(
                        get(tpl, "metadata").and_then(|m| get(m, "labels")),
                        &join_key(&tmeta, "labels"),
                    )?;
                    if let Some(pod_spec) = get(tpl, "spec") {
                        read_pod_spec(&mut object, pod_spec, &join_key(&tpl_path, "spec"))?;
                    }
                }
            }
        }
        ObjectKind::Service => {
            if let Some(spec) = spec {
                if let Some(sel) = get(spec, "selector") {
                    object.selector = Some(string_map(Some(sel), &join_key(&spec_path, "selector"))?);
                }
                if let Some(t) = get(spec, "type") {
                    object.service_type = Some(expect_string(t, &join_key(&spec_path, "type"))?);
                }
                if let Some(ports) = get(spec, "ports") {
                    let ppath = join_key(&spec_path, "ports");
                    for (i, p) in tree::elements(ports, &ppath)?.into_iter().enumerate() {
                        let at = join_index(&ppath, i);
                        let read = |k: &str| get(p, k).map(|v| expect_string(v, &join_key(&at, k))).transpose();
                        object.service_ports.push(ServicePort {
                            port: read("port")?,
                            target_port: read("targetPort")?,
                        });
                    }
                }
            }
        }
        ObjectKind::Other => {}
    }
    object.raw = raw;
    Ok(object)
}

fn read_pod_spec(object: &mut K8sObject, spec: &Value, path: &str) -> Result<()> {
    if let Some(containers) = get(spec, "containers") {
        let cpath = join_key(path, "containers");
        for (i, c) in tree::elements(containers, &cpath)?.into_iter().enumerate() {
            let at = join_index(&cpath, i);
            let name = get(c, "name")
                .map(|v| expect_string(v, &join_key(&at, "name")))
                .transpose()?
                .unwrap_or_default();
            let image = get(c, "image")
                .map(|v| expect_string(v, &join_key(&at, "image")))
                .transpose()?;
            let mut container_ports = Vec::new();
            if let Some(ports) = get(c, "ports") {
                let ppath = join_key(&at, "ports");
                for (j, p) in tree::elements(ports, &ppath)?.into_iter().enumerate() {
                    if let Some(cp) = get(p, "containerPort") {
                        container_ports.push(expect_string(cp, &join_key(&join_index(&ppath, j), "containerPort"))?);
                    }
                }
            }
            object.containers.push(Container {
                name,
                image,
                container_ports,
            });
        }
    }
    if let Some(volumes) = get(spec, "volumes") {
        let vpath = join_key(path, "volumes");
        for (i, v) in tree::elements(volumes, &vpath)?.into_iter().enumerate() {
            if let Some(n) = get(v, "name") {
                object
                    .volumes
                    .push(expect_string(n, &join_key(&join_index(&vpath, i), "name"))?);
            }
        }
    }
    Ok(())
}

fn type_from_labels(labels: &IndexMap<String, String>) -> Option<String> {
    TYPE_LABELS.iter().find_map(|l| labels.get(*l).cloned())
}

pub fn k8s_to_meta(model: &K8sModel) -> Result<(MetaDescriptor, CoverageLedger)> {
    let mut meta = MetaDescriptor {
        source: Some(source_info(DescriptorKind::Kubernetes, &model.digest)),
        ..Default::default()
    };
    let mut ledger = CoverageLedger::default();

    let workload_ids: Vec<String> = model
        .objects
        .iter()
        .filter(|o| o.is_workload())
        .map(K8sObject::base_id)
        .collect();
    let mut ids: Vec<Option<String>> = Vec::new();

    for object in &model.objects {
        let prefix = join_index("", object.index);
        classify_object(object, &prefix, &mut ledger)?;
        let id = match object.kind {
            ObjectKind::Pod | ObjectKind::Deployment => object.base_id(),
            ObjectKind::Service => {
                let base = object.base_id();
                if workload_ids.contains(&base) {
                    format!("{base}-svc")
                } else {
                    base
                }
            }
            ObjectKind::Other => {
                ids.push(None);
                continue;
            }
        };
        if meta.component(&id).is_some() {
            return Err(Error::schema(
                join_key(&prefix, "metadata"),
                format!("component id `{id}` is produced by more than one object"),
            ));
        }
        meta.components
            .push(object_component(object, id.clone(), &prefix, &mut ledger));
        ids.push(Some(id));
    }

    for (object, id) in model.objects.iter().zip(&ids) {
        let (Some(service_id), Some(selector)) = (id, &object.selector) else {
            continue;
        };
        let prefix = join_index("", object.index);
        let mut matched = 0;
        if !selector.is_empty() {
            for (target, target_id) in model.objects.iter().zip(&ids) {
                let Some(target_id) = target_id else { continue };
                let selected = target.is_workload()
                    && object.same_namespace(target)
                    && selector.iter().all(|(k, v)| target.pod_labels.get(k) == Some(v));
                if selected {
                    meta.relations
                        .insert(Relation::new(service_id, target_id, RelationKind::Exposes));
                    matched += 1;
                }
            }
        }
        if matched == 0 {
            ledger.note(
                join_key(&join_key(&prefix, "spec"), "selector"),
                format!(
                    "warning: selector of Service `{}` matches no Pod or Deployment",
                    object.name
                ),
            );
        }
    }

    ledger.close(&model.raw_paths);
    Ok((meta, ledger))
}

fn object_component(object: &K8sObject, id: String, prefix: &str, ledger: &mut CoverageLedger) -> Component {
    let mut c = Component::new(id, object.name.clone());
    let spec = join_key(prefix, "spec");
    match object.kind {
        ObjectKind::Service => {
            c.kind = ComponentKind::Infrastructure;
            c.component_type = type_from_labels(&object.labels);
            if c.component_type.is_none() {
                if let Some(t) = &object.service_type {
                    c.component_type = Some(t.clone());
                    ledger.map(join_key(&spec, "type"));
                }
            }
            let ports: Vec<String> = object.service_ports.iter().filter_map(|p| p.port.clone()).collect();
            let targets: Vec<String> = object
                .service_ports
                .iter()
                .filter_map(|p| p.target_port.clone())
                .collect();
            if !ports.is_empty() {
                c.properties.insert("port".into(), PropertyValue::from_values(ports));
            }
            if !targets.is_empty() {
                c.properties
                    .insert("targetPort".into(), PropertyValue::from_values(targets));
            }
        }
        _ => {
            c.component_type = type_from_labels(&object.labels).or_else(|| type_from_labels(&object.pod_labels));
            if let Some(first) = object.containers.first() {
                if !first.container_ports.is_empty() {
                    c.properties.insert(
                        "targetPort".into(),
                        PropertyValue::from_values(first.container_ports.clone()),
                    );
                }
                if let Some(image) = &first.image {
                    c.artifacts.insert("image".into(), image.clone());
                }
            }
            if object.containers.len() > 1 {
                let sidecars: Vec<String> = object.containers[1..]
                    .iter()
                    .map(|s| s.image.clone().unwrap_or_else(|| s.name.clone()))
                    .collect();
                ledger.note(
                    prefix,
                    format!("{} sidecar container(s) folded into `sidecars`", sidecars.len()),
                );
                c.properties.insert("sidecars".into(), PropertyValue::List(sidecars));
            }
            if !object.volumes.is_empty() {
                c.properties.insert(
                    "volumes".into(),
                    PropertyValue::for_key("volumes", object.volumes.clone()),
                );
            }
            if let Some(r) = object.replicas {
                c.artifacts.insert("replicas".into(), r.to_string());
            }
        }
    }
    c
}

fn classify_object(object: &K8sObject, prefix: &str, ledger: &mut CoverageLedger) -> Result<()> {
    if object.kind == ObjectKind::Other {
        for (key, v) in entries(&object.raw, prefix)? {
            let reason = match key.as_str() {
                "data" | "stringData" if object.kind_name == "Secret" => R::RedactedSecret,
                _ => R::UnsupportedKind,
            };
            ledger.unmap_all(leaves(v, &join_key(prefix, &key)), reason);
        }
        return Ok(());
    }
    for (key, v) in entries(&object.raw, prefix)? {
        let at = join_key(prefix, &key);
        match key.as_str() {
            "apiVersion" | "kind" => ledger.map_all(leaves(v, &at)),
            "metadata" => {
                for (mk, mv) in entries(v, &at)? {
                    let mpath = join_key(&at, &mk);
                    match mk.as_str() {
                        "name" | "namespace" | "labels" => ledger.map_all(leaves(mv, &mpath)),
                        _ => ledger.unmap_all(leaves(mv, &mpath), R::ObjectMetadata),
                    }
                }
            }
            "spec" => match object.kind {
                ObjectKind::Pod => classify_pod_spec(v, &at, ledger)?,
                ObjectKind::Deployment => {
                    for (sk, sv) in entries(v, &at)? {
                        let spath = join_key(&at, &sk);
                        match sk.as_str() {
                            "replicas" => ledger.map_all(leaves(sv, &spath)),
                            "selector" => ledger.unmap_all(leaves(sv, &spath), R::WorkloadSelector),
                            "template" => {
                                for (tk, tv) in entries(sv, &spath)? {
                                    let tpath = join_key(&spath, &tk);
                                    match tk.as_str() {
                                        "spec" => classify_pod_spec(tv, &tpath, ledger)?,
                                        "metadata" => {
                                            for (mk, mv) in entries(tv, &tpath)? {
                                                let mpath = join_key(&tpath, &mk);
                                                if mk == "labels" {
                                                    ledger.map_all(leaves(mv, &mpath));
                                                } else {
                                                    ledger.unmap_all(leaves(mv, &mpath), R::ObjectMetadata);
                                                }
                                            }
                                        }
                                        _ => ledger.unmap_all(leaves(tv, &tpath), R::UnsupportedDirective),
                                    }
                                }
                            }
                            _ => ledger.unmap_all(leaves(sv, &spath), R::Operational),
                        }
                    }
                }
                ObjectKind::Service => {
                    for (sk, sv) in entries(v, &at)? {
                        let spath = join_key(&at, &sk);
                        match sk.as_str() {
                            "selector" => ledger.map_all(leaves(sv, &spath)),
                            "ports" => {
                                for (i, p) in tree::elements(sv, &spath)?.into_iter().enumerate() {
                                    let ppath = join_index(&spath, i);
                                    for (pk, pv) in entries(p, &ppath)? {
                                        let fpath = join_key(&ppath, &pk);
                                        if pk == "port" || pk == "targetPort" {
                                            ledger.map_all(leaves(pv, &fpath));
                                        } else {
                                            ledger.unmap_all(leaves(pv, &fpath), R::PortDetail);
                                        }
                                    }
                                }
                            }
                            // mapped by object_component when it supplies the type
                            "type" => ledger.unmap_all(leaves(sv, &spath), R::UnsupportedDirective),
                            _ => ledger.unmap_all(leaves(sv, &spath), R::UnsupportedDirective),
                        }
                    }
                }
                ObjectKind::Other => unreachable!(),
            },
            _ => ledger.unmap_all(leaves(v, &at), R::UnsupportedDirective),
        }
    }
    Ok(())
}

fn classify_pod_spec(spec: &Value, path: &str, ledger: &mut CoverageLedger) -> Result<()> {
    for (key, v) in entries(spec, path)? {
        let at = join_key(path, &key);
        match key.as_str() {
            "containers" => {
                for (i, c) in tree::elements(v, &at)?.into_iter().enumerate() {
                    let cpath = join_index(&at, i);
                    for (ck, cv) in entries(c, &cpath)? {
                        let fpath = join_key(&cpath, &ck);
                        match ck.as_str() {
                            "image" => ledger.map_all(leaves(cv, &fpath)),
                            "env" => {
                                for (j, e) in tree::elements(cv, &fpath)?.into_iter().enumerate() {
                                    let secret = get(e, "name").and_then(|n| n.as_str()).is_some_and(is_secret_key);
                                    let reason = if secret { R::RedactedSecret } else { R::ContainerDetail };
                                    ledger.unmap_all(leaves(e, &join_index(&fpath, j)), reason);
                                }
                            }
                            "ports" if i == 0 => {
                                for (j, p) in tree::elements(cv, &fpath)?.into_iter().enumerate() {
                                    let ppath = join_index(&fpath, j);
                                    for (pk, pv) in entries(p, &ppath)? {
                                        let leafp = join_key(&ppath, &pk);
                                        if pk == "containerPort" {
                                            ledger.map_all(leaves(pv, &leafp));
                                        } else {
                                            ledger.unmap_all(leaves(pv, &leafp), R::PortDetail);
                                        }
                                    }
                                }
                            }
                            _ => ledger.unmap_all(leaves(cv, &fpath), R::ContainerDetail),
                        }
                    }
                }
            }
            "volumes" => {
                for (i, vol) in tree::elements(v, &at)?.into_iter().enumerate() {
                    let vpath = join_index(&at, i);
                    for (vk, vv) in entries(vol, &vpath)? {
                        let fpath = join_key(&vpath, &vk);
                        if vk == "name" {
                            ledger.map_all(leaves(vv, &fpath));
                        } else {
                            ledger.unmap_all(leaves(vv, &fpath), R::VolumeDetail);
                        }
                    }
                }
            }
            _ => ledger.unmap_all(leaves(v, &at), R::Operational),
        }
    }
    Ok(())
}
