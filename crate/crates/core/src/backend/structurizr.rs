use std::fmt::Write;

use super::{EmitOptions, NodeView, Orientation, Shape, View};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn container(node: &NodeView, out: &mut String) {
    let mut line = format!(
        "            {} = container {} {} {}",
        node.ident,
        quote(&node.name),
        quote(&node.description),
        quote(&node.technology)
    );
    if !node.tags.is_empty() {
        line.push(' ');
        line.push_str(&quote(&node.tags.join(",")));
    }
    if node.properties.is_empty() {
        let _ = writeln!(out, "{line} {{}}");
        return;
    }
    let _ = writeln!(out, "{line} {{");
    out.push_str("                properties {\n");
    for (k, v) in &node.properties {
        let _ = writeln!(out, "                    {} {}", quote(k), quote(v));
    }
    out.push_str("                }\n");
    out.push_str("            }\n");
}

pub(super) fn render(view: &View, opts: &EmitOptions, out: &mut String) {
    out.push_str("workspace {\n");
    out.push_str("    model {\n");
    for node in &view.externals {
        match node.shape {
            Shape::Person => {
                let _ = writeln!(out, "        {} = person {}", node.ident, quote(&node.name));
            }
            _ => {
                let _ = writeln!(
                    out,
                    "        {} = softwareSystem {} \"\" \"External\"",
                    node.ident,
                    quote(&node.name)
                );
            }
        }
    }
    let _ = writeln!(
        out,
        "        softwareSystem = softwareSystem {} {{",
        quote(&opts.system_name)
    );
    for node in &view.components {
        container(node, out);
    }
    if !view.edges.is_empty() && !view.components.is_empty() {
        out.push('\n');
    }
    for edge in &view.edges {
        let _ = writeln!(out, "            {} -> {} {}", edge.from, edge.to, quote(&edge.label));
    }
    out.push_str("        }\n");
    out.push_str("    }\n\n");
    out.push_str("    views {\n");
    out.push_str("        container softwareSystem \"Containers\" {\n");
    out.push_str("            include *\n");
    let layout = match opts.orientation {
        Orientation::TopBottom => "tb",
        Orientation::LeftRight => "lr",
    };
    let _ = writeln!(out, "            autoLayout {layout}");
    out.push_str("        }\n\n");
    out.push_str("        styles {\n");
    let mut style = |tag: &str, body: &str| {
        let _ = writeln!(
            out,
            "            element {} {{\n                {body}\n            }}",
            quote(tag)
        );
    };
    style("Person", "shape Person");
    style("External", "background #999999");
    for tag in &view.tags {
        let shape = match tag.as_str() {
            "Infrastructure" => "shape Folder",
            "database" => "shape Cylinder",
            "cache" => "shape Pipe",
            "web-proxy" => "shape Hexagon",
            _ => "shape RoundedBox",
        };
        style(tag, shape);
    }
    out.push_str("        }\n");
    out.push_str("    }\n");
    out.push_str("}\n");
}
