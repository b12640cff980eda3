//! The view of a standard ranked structure that the ultrapower needs.
//!
//! Both directed members ([`RankedDigraph`]) and their underlying undirected
//! graphs ([`RankedGraph`](crate::underlying::RankedGraph)) implement it, so
//! one construction serves both.

use crate::digraph::{Element, ElementKind, Polarity, Rank, RankedDigraph};

pub trait RankedStructure: Clone + Send + Sync {
    fn rank(&self) -> Rank;

    /// Number of declared finite ditip ranks.
    fn finite_depth(&self) -> u32;

    /// All elements of a kind, in declaration order.
    fn elements(&self, kind: ElementKind) -> Vec<Element>;

    fn contains(&self, kind: ElementKind, element: &Element) -> bool;

    /// Index of the next-rank vertex holding `element`: the 0-vertex for an
    /// arc end, the `(k+1)`-vertex for a rank-`k` ditip. `None` for arcs and
    /// unknown elements.
    fn vertex_of(&self, kind: ElementKind, element: &Element) -> Option<usize>;

    /// Polarity of a ditip; always `None` for undirected structures.
    fn polarity(&self, kind: ElementKind, element: &Element) -> Option<Polarity>;

    /// Whether elements of `kind` can be shorted, i.e. a partition of them
    /// into next-rank vertices exists in this structure.
    fn has_partition(&self, kind: ElementKind) -> bool;

    /// Blocks of the partition of `kind`-elements into next-rank vertices.
    fn partition(&self, kind: ElementKind) -> Vec<Vec<Element>>;

    fn is_directed(&self) -> bool;
}

impl RankedStructure for RankedDigraph {
    fn rank(&self) -> Rank {
        RankedDigraph::rank(self)
    }

    fn finite_depth(&self) -> u32 {
        RankedDigraph::finite_depth(self)
    }

    fn elements(&self, kind: ElementKind) -> Vec<Element> {
        match kind {
            ElementKind::Arc => self.arcs().iter().cloned().map(Element::Arc).collect(),
            ElementKind::End => self.arc_ends().map(Element::End).collect(),
            ElementKind::Tip(rank) => self
                .level(rank)
                .map(|l| {
                    l.tips
                        .iter()
                        .map(|(id, _)| Element::Tip(id.clone()))
                        .collect()
                })
                .unwrap_or_default(),
        }
    }

    fn contains(&self, kind: ElementKind, element: &Element) -> bool {
        match (kind, element) {
            (ElementKind::Arc, Element::Arc(a)) => self.has_arc(a),
            (ElementKind::End, Element::End(e)) => self.has_arc(&e.arc),
            (ElementKind::Tip(rank), Element::Tip(t)) => {
                RankedDigraph::polarity(self, rank, t).is_some()
            }
            _ => false,
        }
    }

    fn vertex_of(&self, kind: ElementKind, element: &Element) -> Option<usize> {
        match (kind, element) {
            (ElementKind::End, Element::End(e)) => self.vertex_of_end(e),
            (ElementKind::Tip(rank), Element::Tip(t)) => self.vertex_of_tip(rank, t),
            _ => None,
        }
    }

    fn polarity(&self, kind: ElementKind, element: &Element) -> Option<Polarity> {
        match (kind, element) {
            (ElementKind::Tip(rank), Element::Tip(t)) => RankedDigraph::polarity(self, rank, t),
            _ => None,
        }
    }

    fn has_partition(&self, kind: ElementKind) -> bool {
        match kind {
            ElementKind::Arc => false,
            ElementKind::End => true,
            ElementKind::Tip(rank) => self.level(rank).is_some(),
        }
    }

    fn partition(&self, kind: ElementKind) -> Vec<Vec<Element>> {
        match kind {
            ElementKind::Arc => Vec::new(),
            ElementKind::End => self
                .v0()
                .iter()
                .map(|b| b.members.iter().cloned().map(Element::End).collect())
                .collect(),
            ElementKind::Tip(rank) => self
                .level(rank)
                .map(|l| {
                    l.vertices
                        .iter()
                        .map(|b| b.members.iter().cloned().map(Element::Tip).collect())
                        .collect()
                })
                .unwrap_or_default(),
        }
    }

    fn is_directed(&self) -> bool {
        true
    }
}
