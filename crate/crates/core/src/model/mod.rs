//! The meta-descriptor: a descriptor-independent description of components,
//! the relations between them, and the external actors around them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

mod validate;
mod yaml;

pub use validate::{validate, Severity, ValidationFinding, ValidationReport};
pub use yaml::{deserialize, serialize_canonical};

/// Property keys a component may carry without the `x-` passthrough prefix.
pub const PROPERTY_VOCABULARY: &[&str] = &[
    "volumes",
    "ports",
    "port",
    "targetPort",
    "expose",
    "networks",
    "environment",
    "dataSources",
    "inputVariables",
    "sidecars",
];

pub fn is_known_property(key: &str) -> bool {
    PROPERTY_VOCABULARY.contains(&key) || (key.starts_with("x-") && key.len() > 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum ComponentKind {
    #[default]
    Deployable,
    Infrastructure,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Deployable => "deployable",
            ComponentKind::Infrastructure => "infrastructure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "deployable" => Some(ComponentKind::Deployable),
            "infrastructure" => Some(ComponentKind::Infrastructure),
            _ => None,
        }
    }
}

/// Property keys whose single value is written as a scalar.
pub const SCALAR_PROPERTIES: &[&str] = &["port", "targetPort"];

/// A property value: one scalar or a list of scalars, kept as text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyValue {
    Scalar(String),
    List(Vec<String>),
}

impl PropertyValue {
    /// A single value stays scalar; several become a list.
    pub fn from_values(mut values: Vec<String>) -> Self {
        if values.len() == 1 {
            PropertyValue::Scalar(values.remove(0))
        } else {
            PropertyValue::List(values)
        }
    }

    /// Value for a vocabulary key: port keys collapse a single value to a
    /// scalar, every other key keeps a list.
    pub fn for_key(key: &str, values: Vec<String>) -> Self {
        if SCALAR_PROPERTIES.contains(&key) {
            PropertyValue::from_values(values)
        } else {
            PropertyValue::List(values)
        }
    }

    pub fn values(&self) -> Vec<&str> {
        match self {
            PropertyValue::Scalar(s) => vec![s.as_str()],
            PropertyValue::List(items) => items.iter().map(String::as_str).collect(),
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.values().join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Component {
    /// Key in the source descriptor (service name, object name, resource address).
    pub id: String,
    pub name: String,
    pub component_type: Option<String>,
    pub kind: ComponentKind,
    pub properties: BTreeMap<String, PropertyValue>,
    pub artifacts: BTreeMap<String, String>,
}

impl Component {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Component {
            id: id.into(),
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn replicas(&self) -> Option<&str> {
        self.artifacts.get("replicas").map(String::as_str)
    }

    /// The artifact shown as the node's technology: image, else build
    /// context, else module source, else provider.
    pub fn technology(&self) -> Option<&str> {
        ["image", "build", "source", "provider"]
            .iter()
            .find_map(|k| self.artifacts.get(*k))
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    DependsOn,
    Exposes,
    Interacts,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::DependsOn => "depends_on",
            RelationKind::Exposes => "exposes",
            RelationKind::Interacts => "interacts",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "depends_on" => Some(RelationKind::DependsOn),
            "exposes" => Some(RelationKind::Exposes),
            "interacts" => Some(RelationKind::Interacts),
            _ => None,
        }
    }
}

/// Where a relation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Origin {
    #[default]
    Descriptor,
    Annotation,
}

/// Directed edge from the dependent (`from`, serialized `out`) to the
/// dependency (`to`, serialized `in`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    pub from: String,
    pub to: String,
    pub kind: RelationKind,
    pub label: Option<String>,
    pub origin: Origin,
}

impl Relation {
    pub fn new(from: impl Into<String>, to: impl Into<String>, kind: RelationKind) -> Self {
        Relation {
            from: from.into(),
            to: to.into(),
            kind,
            label: None,
            origin: Origin::Descriptor,
        }
    }

    pub fn annotated(mut self) -> Self {
        self.origin = Origin::Annotation;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeClass {
    Person,
    ExternalSystem,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Person => "person",
            NodeClass::ExternalSystem => "external_system",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "person" => Some(NodeClass::Person),
            "external_system" => Some(NodeClass::ExternalSystem),
            _ => None,
        }
    }
}

/// A person or outside system that interacts with the described system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalNode {
    pub id: String,
    pub label: String,
    pub node_class: NodeClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DescriptorKind {
    Compose,
    Kubernetes,
    Terraform,
}

impl DescriptorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DescriptorKind::Compose => "compose",
            DescriptorKind::Kubernetes => "kubernetes",
            DescriptorKind::Terraform => "terraform",
        }
    }
}

/// Provenance of a meta-descriptor. Not part of the canonical text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceInfo {
    pub kind: DescriptorKind,
    /// Hex SHA-256 of the descriptor text.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetaDescriptor {
    pub components: Vec<Component>,
    /// Kept ordered by (out, in, kind).
    pub relations: BTreeSet<Relation>,
    pub externals: Vec<ExternalNode>,
    /// Component where reading the diagram starts, when declared.
    pub entrypoint: Option<String>,
    pub source: Option<SourceInfo>,
}

impl MetaDescriptor {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn component_mut(&mut self, id: &str) -> Option<&mut Component> {
        self.components.iter_mut().find(|c| c.id == id)
    }

    pub fn external(&self, id: &str) -> Option<&ExternalNode> {
        self.externals.iter().find(|e| e.id == id)
    }

    /// True when `id` names a component or an external node.
    pub fn has_node(&self, id: &str) -> bool {
        self.component(id).is_some() || self.external(id).is_some()
    }

    pub fn has_relation(&self, from: &str, to: &str, kind: RelationKind) -> bool {
        self.relations
            .iter()
            .any(|r| r.from == from && r.to == to && r.kind == kind)
    }

    pub fn relations_of_kind(&self, kind: RelationKind) -> impl Iterator<Item = &Relation> {
        self.relations.iter().filter(move |r| r.kind == kind)
    }

    /// Cycles in the `depends_on` subgraph, as closed paths.
    pub fn dependency_cycles(&self) -> Vec<Vec<String>> {
        let nodes: Vec<&str> = self.components.iter().map(|c| c.id.as_str()).collect();
        let edges: Vec<(&str, &str)> = self
            .relations_of_kind(RelationKind::DependsOn)
            .map(|r| (r.from.as_str(), r.to.as_str()))
            .collect();
        crate::graph::find_cycles(&nodes, &edges)
    }

    /// Copy without provenance, for comparing models from different sources.
    pub fn without_source(&self) -> MetaDescriptor {
        MetaDescriptor {
            source: None,
            ..self.clone()
        }
    }
}
