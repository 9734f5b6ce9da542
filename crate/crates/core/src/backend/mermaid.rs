use std::fmt::Write;

use super::{EmitOptions, NodeView, Orientation, Shape, View};

fn escape(s: &str) -> String {
    s.replace('"', "#quot;")
        .replace('<', "#lt;")
        .replace('>', "#gt;")
        .replace('|', "#124;")
}

fn class_name(tag: &str) -> String {
    tag.to_ascii_lowercase()
        .replace(|c: char| !c.is_ascii_alphanumeric(), "_")
}

fn label(node: &NodeView) -> String {
    let mut parts = vec![escape(&node.name)];
    if !node.description.is_empty() {
        parts.push(format!("[{}]", escape(&node.description)));
    }
    if !node.technology.is_empty() {
        parts.push(escape(&node.technology));
    }
    for (k, v) in &node.properties {
        parts.push(format!("{}: {}", escape(k), escape(v)));
    }
    parts.join("<br/>")
}

fn statement(node: &NodeView) -> String {
    let text = label(node);
    let (shape, class) = match node.shape {
        Shape::Container => (
            format!("[\"{text}\"]"),
            node.tech_tag.as_deref().map_or("container".into(), class_name),
        ),
        Shape::Infrastructure => (format!("[(\"{text}\")]"), "infrastructure".into()),
        Shape::Person => (format!("([\"{text}\"])"), "person".into()),
        Shape::External => (format!("[[\"{text}\"]]"), "external".into()),
    };
    format!("{}{shape}:::{class}", node.ident)
}

pub(super) fn render(view: &View, opts: &EmitOptions, out: &mut String) {
    let dir = match opts.orientation {
        Orientation::TopBottom => "TD",
        Orientation::LeftRight => "LR",
    };
    let _ = writeln!(out, "graph {dir}");
    for node in &view.externals {
        let _ = writeln!(out, "    {}", statement(node));
    }
    let _ = writeln!(out, "    subgraph system_boundary [\"{}\"]", escape(&opts.system_name));
    for node in &view.components {
        let _ = writeln!(out, "        {}", statement(node));
    }
    out.push_str("    end\n");
    for edge in &view.edges {
        let _ = writeln!(out, "    {} -->|{}| {}", edge.from, escape(&edge.label), edge.to);
    }
    out.push_str("    %% legend\n");
    out.push_str("    classDef container fill:#438dd5,stroke:#2e6295,color:#ffffff\n");
    out.push_str("    classDef infrastructure fill:#85bbf0,stroke:#5d82a8,color:#000000\n");
    out.push_str("    classDef person fill:#08427b,stroke:#052e56,color:#ffffff\n");
    out.push_str("    classDef external fill:#999999,stroke:#6b6b6b,color:#ffffff\n");
    for tag in &view.tags {
        let class = class_name(tag);
        if class != "infrastructure" {
            let _ = writeln!(
                out,
                "    classDef {class} fill:#438dd5,stroke:#2e6295,color:#ffffff,stroke-width:3px"
            );
        }
    }
}
