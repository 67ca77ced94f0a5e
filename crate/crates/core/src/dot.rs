//! Graphviz DOT export in the usual recipe drawing style: rounded boxes for
//! comestibles, plain boxes for actions, labels of the form `id: type`.

use std::fmt::Write;

use crate::recipe::Recipe;
use crate::typekb::Kind;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders `r` as a DOT digraph named `name`. Nodes and arcs are sorted by id.
pub fn export_dot(r: &Recipe, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(name));
    out.push_str("  rankdir=TB;\n");
    let mut nodes: Vec<_> = r.nodes().collect();
    nodes.sort();
    for n in nodes {
        let shape = match r.kind_of(n) {
            Some(Kind::Comestible) => "shape=box, style=rounded",
            _ => "shape=box",
        };
        let label = format!("{}: {}", n, r.typing()[n]);
        let _ = writeln!(out, "  {} [{shape}, label={}];", quote(n.as_str()), quote(&label));
    }
    for (a, b) in r.arcs() {
        let _ = writeln!(out, "  {} -> {};", quote(a.as_str()), quote(b.as_str()));
    }
    out.push_str("}\n");
    out
}
