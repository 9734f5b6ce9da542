//! Terraform frontend for configurations in JSON syntax (`.tf.json`).
//!
//! Resources and modules become components. Only explicit `depends_on`
//! entries become relations; references inside `${...}` expressions are
//! noted in the ledger and never turned into edges.

use indexmap::IndexMap;
use serde_yaml::Value;

use super::{check_dependency_cycles, is_secret_key, source_info};
use crate::coverage::{CoverageLedger, UnmappedReason as R};
use crate::error::{Error, Result};
use crate::model::{Component, DescriptorKind, MetaDescriptor, PropertyValue, Relation, RelationKind};
use crate::tree::{self, entries, expect_string, join_key, key_text, leaf_values, leaves};

/// Module arguments that configure the call rather than feed the module.
const MODULE_META_ARGS: &[&str] = &["source", "version", "depends_on", "providers", "count", "for_each"];

#[derive(Debug, Clone, PartialEq)]
pub struct TfResource {
    pub resource_type: String,
    pub name: String,
    pub depends_on: Vec<String>,
    pub provider: Option<String>,
    pub arguments: IndexMap<String, Value>,
    position: usize,
}

impl TfResource {
    pub fn address(&self) -> String {
        format!("{}.{}", self.resource_type, self.name)
    }

    fn path(&self) -> String {
        join_key(&join_key("resource", &self.resource_type), &self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfModule {
    pub name: String,
    pub source: Option<String>,
    pub depends_on: Vec<String>,
    pub inputs: Vec<String>,
    arguments: IndexMap<String, Value>,
    position: usize,
}

impl TfModule {
    pub fn address(&self) -> String {
        format!("module.{}", self.name)
    }

    fn path(&self) -> String {
        join_key("module", &self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfDataSource {
    pub data_type: String,
    pub name: String,
    body: Value,
}

impl TfDataSource {
    pub fn address(&self) -> String {
        format!("data.{}.{}", self.data_type, self.name)
    }

    fn path(&self) -> String {
        join_key(&join_key("data", &self.data_type), &self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfModel {
    pub resources: Vec<TfResource>,
    pub modules: Vec<TfModule>,
    pub data_sources: Vec<TfDataSource>,
    pub raw_paths: Vec<String>,
    other_blocks: Vec<(String, Value)>,
    digest: String,
}

/// Provider of a resource type: the text before its first `_`.
pub fn provider_of(resource_type: &str) -> &str {
    resource_type.split('_').next().unwrap_or(resource_type)
}

pub fn parse_tf_json(text: &str) -> Result<TfModel> {
    let json: serde_json::Value = serde_json::from_str(text)?;
    if !json.is_object() {
        return Err(Error::schema("$", "Terraform JSON configuration must be an object"));
    }
    let doc: Value = serde_yaml::to_value(&json).map_err(Error::from)?;
    let mut model = TfModel {
        resources: Vec::new(),
        modules: Vec::new(),
        data_sources: Vec::new(),
        raw_paths: leaves(&doc, ""),
        other_blocks: Vec::new(),
        digest: super::digest(text),
    };
    let mut position = 0;

    for (block, body) in entries(&doc, "$")? {
        match block.as_str() {
            "resource" => {
                for (rtype, named) in object_entries(body, "resource")? {
                    let tpath = join_key("resource", &rtype);
                    for (name, rbody) in object_entries(named, &tpath)? {
                        let rpath = join_key(&tpath, &name);
                        let arguments = arguments(rbody, &rpath)?;
                        if model
                            .resources
                            .iter()
                            .any(|r| r.resource_type == rtype && r.name == name)
                        {
                            return Err(Error::schema(rpath, "duplicate resource"));
                        }
                        model.resources.push(TfResource {
                            depends_on: depends_on(&arguments, &rpath)?,
                            provider: arguments
                                .get("provider")
                                .map(|v| expect_string(v, &join_key(&rpath, "provider")))
                                .transpose()?,
                            resource_type: rtype.clone(),
                            name,
                            arguments,
                            position,
                        });
                        position += 1;
                    }
                }
            }
            "module" => {
                for (name, mbody) in object_entries(body, "module")? {
                    let mpath = join_key("module", &name);
                    let arguments = arguments(mbody, &mpath)?;
                    model.modules.push(TfModule {
                        source: arguments
                            .get("source")
                            .map(|v| expect_string(v, &join_key(&mpath, "source")))
                            .transpose()?,
                        depends_on: depends_on(&arguments, &mpath)?,
                        inputs: arguments
                            .keys()
                            .filter(|k| !MODULE_META_ARGS.contains(&k.as_str()) && !is_secret_key(k))
                            .cloned()
                            .collect(),
                        name,
                        arguments,
                        position,
                    });
                    position += 1;
                }
            }
            "data" => {
                for (dtype, named) in object_entries(body, "data")? {
                    let tpath = join_key("data", &dtype);
                    for (name, dbody) in object_entries(named, &tpath)? {
                        model.data_sources.push(TfDataSource {
                            data_type: dtype.clone(),
                            name,
                            body: dbody.clone(),
                        });
                    }
                }
            }
            _ => model.other_blocks.push((block, body.clone())),
        }
    }
    Ok(model)
}

fn object_entries<'a>(value: &'a Value, path: &str) -> Result<Vec<(String, &'a Value)>> {
    if value.is_mapping() {
        entries(value, path)
    } else {
        Err(Error::schema(path, "expected an object"))
    }
}

fn arguments(body: &Value, path: &str) -> Result<IndexMap<String, Value>> {
    Ok(object_entries(body, path)?
        .into_iter()
        .map(|(k, v)| (k, v.clone()))
        .collect())
}

fn depends_on(arguments: &IndexMap<String, Value>, path: &str) -> Result<Vec<String>> {
    match arguments.get("depends_on") {
        None => Ok(Vec::new()),
        Some(v) => Ok(tree::string_list(v, &join_key(path, "depends_on"))?
            .into_iter()
            .map(|d| {
                d.strip_prefix("${")
                    .and_then(|s| s.strip_suffix('}'))
                    .map(str::to_string)
                    .unwrap_or(d)
            })
            .collect()),
    }
}

pub fn tf_to_meta(model: &TfModel) -> Result<(MetaDescriptor, CoverageLedger)> {
    let mut meta = MetaDescriptor {
        source: Some(source_info(DescriptorKind::Terraform, &model.digest)),
        ..Default::default()
    };
    let mut ledger = CoverageLedger::default();

    let mut placed: Vec<(usize, Component)> = Vec::new();
    for r in &model.resources {
        let mut c = Component::new(r.address(), r.name.clone());
        c.component_type = Some(r.resource_type.clone());
        c.artifacts
            .insert("provider".into(), provider_of(&r.resource_type).to_string());
        placed.push((r.position, c));

        let path = r.path();
        for (arg, value) in &r.arguments {
            let at = join_key(&path, arg);
            match arg.as_str() {
                "depends_on" => ledger.map_all(leaves(value, &at)),
                "provider" => {
                    ledger.unmap_all(leaves(value, &at), R::ProviderAlias);
                    ledger.note(
                        &at,
                        "explicit provider alias; artifacts.provider derived from the resource type",
                    );
                }
                a if is_secret_key(a) => ledger.unmap_all(leaves(value, &at), R::RedactedSecret),
                _ => ledger.unmap_all(leaves(value, &at), R::ResourceArgument),
            }
        }
    }
    for m in &model.modules {
        let mut c = Component::new(m.address(), m.name.clone());
        if let Some(src) = &m.source {
            c.artifacts.insert("source".into(), src.clone());
        }
        if !m.inputs.is_empty() {
            c.properties
                .insert("inputVariables".into(), PropertyValue::List(m.inputs.clone()));
        }
        placed.push((m.position, c));

        let path = m.path();
        for (arg, value) in &m.arguments {
            let at = join_key(&path, arg);
            match arg.as_str() {
                "source" | "depends_on" => ledger.map_all(leaves(value, &at)),
                a if MODULE_META_ARGS.contains(&a) => ledger.unmap_all(leaves(value, &at), R::ResourceArgument),
                a if is_secret_key(a) => ledger.unmap_all(leaves(value, &at), R::RedactedSecret),
                _ => ledger.map_all(leaves(value, &at)),
            }
        }
    }
    placed.sort_by_key(|(pos, _)| *pos);
    meta.components = placed.into_iter().map(|(_, c)| c).collect();

    let mut referenced_data = Vec::new();
    let dependents = model
        .resources
        .iter()
        .map(|r| (r.address(), &r.depends_on))
        .chain(model.modules.iter().map(|m| (m.address(), &m.depends_on)));
    for (from, deps) in dependents {
        for dep in deps {
            if let Some(data_addr) = dep.strip_prefix("data.") {
                if !model.data_sources.iter().any(|d| d.address() == *dep) {
                    return Err(Error::UnknownDependency { from, to: dep.clone() });
                }
                let c = meta.component_mut(&from).expect("component exists");
                match c
                    .properties
                    .entry("dataSources".into())
                    .or_insert_with(|| PropertyValue::List(Vec::new()))
                {
                    PropertyValue::List(items) => items.push(data_addr.to_string()),
                    PropertyValue::Scalar(_) => unreachable!("dataSources is always a list"),
                }
                referenced_data.push(dep.clone());
            } else if meta.component(dep).is_some() {
                meta.relations
                    .insert(Relation::new(&from, dep, RelationKind::DependsOn));
            } else {
                return Err(Error::UnknownDependency { from, to: dep.clone() });
            }
        }
    }
    check_dependency_cycles(&meta)?;

    for d in &model.data_sources {
        let paths = leaves(&d.body, &d.path());
        if referenced_data.contains(&d.address()) {
            ledger.map_all(paths);
        } else {
            ledger.unmap_all(paths, R::UnreferencedDataSource);
        }
    }
    for (block, body) in &model.other_blocks {
        let at = join_key("", block);
        ledger.unmap_all(leaves(body, &at), R::TopLevelDefinition);
        // defaults and values of secret-named variables and outputs
        if block == "variable" || block == "output" {
            for (name, decl) in body.as_mapping().into_iter().flatten() {
                let Some(name) = key_text(name).filter(|n| is_secret_key(n)) else {
                    continue;
                };
                let at = join_key(&at, &name);
                for (key, v) in decl.as_mapping().into_iter().flatten() {
                    if let Some(k @ ("default" | "value")) = key.as_str() {
                        ledger.unmap_all(leaves(v, &join_key(&at, k)), R::RedactedSecret);
                    }
                }
            }
        }
    }

    for r in &model.resources {
        for (arg, value) in &r.arguments {
            for (path, leaf) in leaf_values(value, &join_key(&r.path(), arg)) {
                if leaf.as_str().is_some_and(|s| s.contains("${")) {
                    ledger.note(path, "expression reference not evaluated");
                }
            }
        }
    }

    ledger.close(&model.raw_paths);
    Ok((meta, ledger))
}
