//! Architecture diagrams from deployment descriptors.
//!
//! Docker Compose files, Kubernetes manifests and Terraform JSON
//! configurations are read by [`frontend`]s into a [`model::MetaDescriptor`],
//! completed with [`annotations`], and emitted by [`backend`] as Structurizr
//! DSL, Mermaid or Graphviz DOT. [`consistency`] re-derives a diagram to
//! check it is still what its descriptor produces; [`lint`] checks the
//! result against diagram guidelines.

pub mod annotations;
pub mod backend;
pub mod cli;
pub mod consistency;
pub mod coverage;
pub mod error;
pub mod frontend;
pub mod graph;
pub mod lint;
pub mod model;
pub mod pipeline;
pub mod tech;
pub mod tree;

pub use error::{Error, Result};
