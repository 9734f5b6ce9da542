use std::fmt::Write;

use super::{EmitOptions, NodeView, Orientation, Shape, View};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

fn statement(node: &NodeView) -> String {
    let mut lines = vec![node.name.clone()];
    if !node.description.is_empty() {
        lines.push(format!("[{}]", node.description));
    }
    if !node.technology.is_empty() {
        lines.push(node.technology.clone());
    }
    for (k, v) in &node.properties {
        lines.push(format!("{k}: {v}"));
    }
    let label = lines.iter().map(|l| escape(l)).collect::<Vec<_>>().join("\\n");
    let shape = match node.shape {
        Shape::Container => "shape=box, style=rounded",
        Shape::Infrastructure => "shape=cylinder",
        Shape::Person => "shape=ellipse",
        Shape::External => "shape=box, style=dashed",
    };
    let mut attrs = format!("label=\"{label}\", {shape}");
    if let Some(tag) = &node.tech_tag {
        let _ = write!(attrs, ", class={}", quote(tag));
    }
    format!("{} [{attrs}];", node.ident)
}

pub(super) fn render(view: &View, opts: &EmitOptions, out: &mut String) {
    let _ = writeln!(out, "digraph {} {{", quote(&opts.system_name));
    let rankdir = match opts.orientation {
        Orientation::TopBottom => "TB",
        Orientation::LeftRight => "LR",
    };
    let _ = writeln!(out, "    rankdir={rankdir};");
    out.push_str("    node [fontname=\"Helvetica\"];\n");
    out.push_str("    edge [fontname=\"Helvetica\", fontsize=10];\n");
    out.push_str("    // legend\n");
    out.push_str("    labelloc=b;\n");
    out.push_str("    label=\"rounded box: container, cylinder: infrastructure, ellipse: person, dashed box: external system\";\n");
    for node in &view.externals {
        let _ = writeln!(out, "    {}", statement(node));
    }
    out.push_str("    subgraph cluster_system {\n");
    let _ = writeln!(out, "        label={};", quote(&opts.system_name));
    for node in &view.components {
        let _ = writeln!(out, "        {}", statement(node));
    }
    out.push_str("    }\n");
    for edge in &view.edges {
        let _ = writeln!(out, "    {} -> {} [label={}];", edge.from, edge.to, quote(&edge.label));
    }
    out.push_str("}\n");
}
