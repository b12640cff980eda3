//! Graphviz DOT export.
//!
//! Arcs (branches) join the 0-vertices holding their two ends. Vertices of
//! higher rank are boxes; each ditip is drawn as a dashed half-edge on the
//! vertex it belongs to, pointing in for intips and out for outtips.

use std::fmt::Write as _;

use crate::digraph::{Polarity, Rank, RankedDigraph, Side};
use crate::structure::RankedStructure;
use crate::ultrapower::{vertex_rank, NsDigraph};
use crate::underlying::RankedGraph;
use crate::{Element, ElementKind};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

struct Writer {
    out: String,
    directed: bool,
}

impl Writer {
    fn new(name: &str, directed: bool) -> Self {
        let mut out = String::new();
        let kw = if directed { "digraph" } else { "graph" };
        writeln!(out, "{kw} {} {{", quote(name)).unwrap();
        writeln!(out, "  node [shape=circle];").unwrap();
        Writer { out, directed }
    }

    fn node(&mut self, id: &str, attrs: &str) {
        writeln!(self.out, "  {} [{attrs}];", quote(id)).unwrap();
    }

    fn edge(&mut self, from: &str, to: &str, attrs: &str) {
        let op = if self.directed { "->" } else { "--" };
        writeln!(self.out, "  {} {op} {} [{attrs}];", quote(from), quote(to)).unwrap();
    }

    /// A ditip hanging off vertex `vertex`.
    fn half_edge(&mut self, tip_id: &str, vertex: &str, label: &str, polarity: Option<Polarity>) {
        self.node(tip_id, "shape=point");
        let attrs = format!("style=dashed, label={}", quote(label));
        match polarity {
            Some(Polarity::Outtip) => self.edge(vertex, tip_id, &attrs),
            _ => self.edge(tip_id, vertex, &attrs),
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("}\n");
        self.out
    }
}

fn vertex_id(rank: Rank, name: &str) -> String {
    format!("v{rank}:{name}")
}

fn tip_id(rank: Rank, name: &str) -> String {
    format!("t{rank}:{name}")
}

fn polarity_word(p: Option<Polarity>) -> &'static str {
    match p {
        Some(Polarity::Intip) => " in",
        Some(Polarity::Outtip) => " out",
        None => "",
    }
}

fn standard<S: RankedStructure>(
    name: &str,
    s: &S,
    v0_names: Vec<String>,
    tip_levels: Vec<(Rank, Vec<String>)>,
) -> String {
    let mut w = Writer::new(name, s.is_directed());
    for v in &v0_names {
        w.node(
            &vertex_id(Rank::Finite(0), v),
            &format!("label={}", quote(v)),
        );
    }
    for arc in s.elements(ElementKind::Arc) {
        let Element::Arc(a) = &arc else { continue };
        let at = |side| {
            let e = Element::End(crate::ArcEnd::new(a.clone(), side));
            s.vertex_of(ElementKind::End, &e).map(|i| &v0_names[i])
        };
        if let (Some(from), Some(to)) = (at(Side::Source), at(Side::Sink)) {
            w.edge(
                &vertex_id(Rank::Finite(0), from),
                &vertex_id(Rank::Finite(0), to),
                &format!("label={}", quote(a)),
            );
        }
    }
    for (tip_rank, vnames) in tip_levels {
        let kind = ElementKind::Tip(tip_rank);
        let vr = vertex_rank(tip_rank);
        for v in &vnames {
            w.node(
                &vertex_id(vr, v),
                &format!("shape=box, label={}", quote(&format!("{v} ({vr})"))),
            );
        }
        for tip in s.elements(kind) {
            let Some(i) = s.vertex_of(kind, &tip) else {
                continue;
            };
            let pol = s.polarity(kind, &tip);
            let label = format!("{tip}{}", polarity_word(pol));
            w.half_edge(
                &tip_id(tip_rank, &tip.to_string()),
                &vertex_id(vr, &vnames[i]),
                &label,
                pol,
            );
        }
    }
    w.finish()
}

fn tip_ranks(depth: u32, arrow: bool) -> impl Iterator<Item = Rank> {
    (0..depth)
        .map(Rank::Finite)
        .chain(arrow.then_some(Rank::ArrowOmega))
}

/// DOT for a standard member.
pub fn digraph_dot(name: &str, d: &RankedDigraph) -> String {
    let v0 = d.v0().iter().map(|b| b.name.clone()).collect();
    let levels = tip_ranks(d.finite_depth(), d.level(Rank::ArrowOmega).is_some())
        .map(|r| {
            (
                r,
                d.level(r)
                    .unwrap()
                    .vertices
                    .iter()
                    .map(|b| b.name.clone())
                    .collect(),
            )
        })
        .collect();
    standard(name, d, v0, levels)
}

/// DOT for an underlying graph.
pub fn graph_dot(name: &str, g: &RankedGraph) -> String {
    let v0 = g.x0().iter().map(|b| b.name.clone()).collect();
    let levels = tip_ranks(g.finite_depth(), g.level(Rank::ArrowOmega).is_some())
        .map(|r| {
            (
                r,
                g.level(r)
                    .unwrap()
                    .nodes
                    .iter()
                    .map(|b| b.name.clone())
                    .collect(),
            )
        })
        .collect();
    standard(name, g, v0, levels)
}

/// DOT for a built nonstandard digraph (or its underlying graph), labelled
/// by canonical representatives.
pub fn ns_dot(name: &str, ns: &NsDigraph) -> String {
    let mut w = Writer::new(name, ns.directed);
    let r0 = Rank::Finite(0);
    for v in &ns.v0 {
        w.node(
            &vertex_id(r0, &v.label),
            &format!("label={}", quote(&v.label)),
        );
    }
    let v0_label = |end: usize| {
        ns.v0
            .iter()
            .find(|v| v.members.contains(&end))
            .map(|v| v.label.as_str())
    };
    for (i, arc) in ns.arcs.iter().enumerate() {
        let end_of = |side| ns.end_arcs.iter().position(|&(a, s)| a == i && s == side);
        let from = end_of(Side::Source).and_then(v0_label);
        let to = end_of(Side::Sink).and_then(v0_label);
        if let (Some(from), Some(to)) = (from, to) {
            w.edge(
                &vertex_id(r0, from),
                &vertex_id(r0, to),
                &format!("label={}", quote(&arc.label)),
            );
        }
    }
    for level in ns.all_levels() {
        let vr = vertex_rank(level.tip_rank);
        for v in &level.vertices {
            w.node(
                &vertex_id(vr, &v.label),
                &format!("shape=box, label={}", quote(&format!("{} ({vr})", v.label))),
            );
            for &m in &v.members {
                let tip = &level.tips[m];
                let label = format!("{}{}", tip.label, polarity_word(tip.polarity));
                w.half_edge(
                    &tip_id(level.tip_rank, &tip.label),
                    &vertex_id(vr, &v.label),
                    &label,
                    tip.polarity,
                );
            }
        }
    }
    w.finish()
}
