//! Graph-description export with deterministic ordering.

use std::fmt::Write as _;

use crate::hytn::{Hytn, HytnWeight};
use crate::network::Cstn;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// A network as a digraph: one node per event (observation events annotated
/// with their proposition), one labeled edge per constraint, drawn from the
/// earlier endpoint to the bounded one.
pub fn cstn_to_dot(g: &Cstn) -> String {
    let mut out = String::from("digraph cstn {\n");
    let _ = writeln!(out, "  rankdir=LR;");
    for node in g.nodes() {
        let mut attrs = Vec::new();
        match (&node.observes, node.label.is_empty()) {
            (Some(p), true) => attrs.push(format!("label=\"{}\\n{}?\"", node.id, p)),
            (Some(p), false) => {
                attrs.push(format!("label=\"{}\\n{}? [{}]\"", node.id, p, node.label))
            }
            (None, false) => attrs.push(format!("label=\"{}\\n[{}]\"", node.id, node.label)),
            (None, true) => {}
        }
        if attrs.is_empty() {
            let _ = writeln!(out, "  {};", quote(&node.id));
        } else {
            let _ = writeln!(out, "  {} [{}];", quote(&node.id), attrs.join(", "));
        }
    }
    for c in g.constraints() {
        let label = if c.label.is_empty() {
            format!("{}", c.weight)
        } else {
            format!("{}, {}", c.weight, c.label)
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&c.u),
            quote(&c.v),
            quote(&label)
        );
    }
    out.push_str("}\n");
    out
}

/// A hyper network as a digraph. Every hyperarc is rendered through a point
/// junction node: tail to junction, then one weighted edge per head.
pub fn hytn_to_dot<W: HytnWeight>(h: &Hytn<W>) -> String {
    let mut out = String::from("digraph hytn {\n");
    let _ = writeln!(out, "  rankdir=LR;");
    for name in h.node_names() {
        let _ = writeln!(out, "  {};", quote(name));
    }
    for (j, arc) in h.hyperarcs().iter().enumerate() {
        let junction = format!("j{j}");
        let _ = writeln!(out, "  {junction} [shape=point];");
        let _ = writeln!(
            out,
            "  {} -> {junction} [arrowhead=none];",
            quote(h.node_name(arc.tail()))
        );
        for (head, w) in arc.heads() {
            let _ = writeln!(
                out,
                "  {junction} -> {} [label={}];",
                quote(h.node_name(head)),
                quote(&w.to_string())
            );
        }
    }
    out.push_str("}\n");
    out
}
