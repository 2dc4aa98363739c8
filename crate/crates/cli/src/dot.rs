//! Graphviz rendering of the bipartite port/unit graph.

use std::fmt::Write;

use computon::computon::Computon;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Ports are ellipses (interface ports doubled), units are boxes; flows on
/// control ports are dashed. Outflow edges carry their device.
pub fn to_dot(name: &str, c: &Computon) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(name));
    let _ = writeln!(out, "  rankdir=LR;");
    for p in 0..c.ports() {
        let shape = if c.is_inport(p) || c.is_outport(p) {
            "doublecircle"
        } else {
            "ellipse"
        };
        let _ = writeln!(
            out,
            "  p{p} [label={}, shape={shape}, tooltip=\"colour {}\"];",
            quote(c.label(p)),
            c.colour().apply(p)
        );
    }
    for u in 0..c.units() {
        let _ = writeln!(out, "  u{u} [label=\"u{u}\", shape=box];");
    }
    let style = |p: usize| if c.is_control(p) { "dashed" } else { "solid" };
    for i in 0..c.inflows() {
        let (p, u) = (c.src().apply(i), c.in_unit().apply(i));
        let _ = writeln!(out, "  p{p} -> u{u} [style={}];", style(p));
    }
    for o in 0..c.outflows() {
        let (u, p) = (c.out_unit().apply(o), c.tgt().apply(o));
        let _ = writeln!(
            out,
            "  u{u} -> p{p} [style={}, label={}];",
            style(p),
            quote(c.device(o).as_str())
        );
    }
    out.push_str("}\n");
    out
}
