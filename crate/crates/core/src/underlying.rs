//! Underlying undirected structures: forgetting arc directions and ditip
//! polarities, for standard members and for built nonstandard digraphs.
//!
//! Branch ids reuse arc ids and tip ids reuse ditip ids. A branch's two
//! (−1)-tips keep the `src`/`snk` labels of the arc ends they came from,
//! but only as names: nothing downstream reads a direction from them.

use std::collections::HashMap;

use crate::digraph::{ArcEnd, Block, Element, ElementKind, Polarity, Rank, RankedDigraph, Side};
use crate::structure::RankedStructure;
use crate::ultrapower::NsDigraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphLevel {
    pub tips: Vec<String>,
    pub nodes: Vec<Block<String>>,
}

/// A ranked graph: branches, 0-nodes over branch tips, and per rank a tip
/// set partitioned into next-rank nodes.
#[derive(Debug, Clone)]
pub struct RankedGraph {
    rank: Rank,
    branches: Vec<String>,
    x0: Vec<Block<ArcEnd>>,
    levels: Vec<GraphLevel>,
    arrow: Option<GraphLevel>,
    end_node: HashMap<ArcEnd, usize>,
    tip_node: Vec<HashMap<String, usize>>,
    arrow_node: Option<HashMap<String, usize>>,
}

impl PartialEq for RankedGraph {
    fn eq(&self, other: &Self) -> bool {
        (
            self.rank,
            &self.branches,
            &self.x0,
            &self.levels,
            &self.arrow,
        ) == (
            other.rank,
            &other.branches,
            &other.x0,
            &other.levels,
            &other.arrow,
        )
    }
}

impl Eq for RankedGraph {}

fn node_index(level: &GraphLevel) -> HashMap<String, usize> {
    level
        .nodes
        .iter()
        .enumerate()
        .flat_map(|(i, b)| b.members.iter().map(move |m| (m.clone(), i)))
        .collect()
}

fn erase(level: &crate::digraph::TipLevel) -> GraphLevel {
    GraphLevel {
        tips: level.tips.iter().map(|(id, _)| id.clone()).collect(),
        nodes: level.vertices.clone(),
    }
}

impl RankedGraph {
    fn assemble(
        rank: Rank,
        branches: Vec<String>,
        x0: Vec<Block<ArcEnd>>,
        levels: Vec<GraphLevel>,
        arrow: Option<GraphLevel>,
    ) -> Self {
        let end_node = x0
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.members.iter().map(move |e| (e.clone(), i)))
            .collect();
        RankedGraph {
            tip_node: levels.iter().map(node_index).collect(),
            arrow_node: arrow.as_ref().map(node_index),
            rank,
            branches,
            x0,
            levels,
            arrow,
            end_node,
        }
    }

    pub fn branches(&self) -> &[String] {
        &self.branches
    }

    pub fn x0(&self) -> &[Block<ArcEnd>] {
        &self.x0
    }

    pub fn level(&self, rank: Rank) -> Option<&GraphLevel> {
        match rank {
            Rank::Finite(k) => self.levels.get(k as usize),
            Rank::ArrowOmega => self.arrow.as_ref(),
            Rank::Omega => None,
        }
    }

    fn nodes(&self, rank: Rank) -> Option<&HashMap<String, usize>> {
        match rank {
            Rank::Finite(k) => self.tip_node.get(k as usize),
            Rank::ArrowOmega => self.arrow_node.as_ref(),
            Rank::Omega => None,
        }
    }

    /// Truncation to `rank`, mirroring [`RankedDigraph::slice`].
    pub fn slice(&self, rank: Rank) -> Option<RankedGraph> {
        let (levels, arrow) = match (rank, self.rank) {
            (r, own) if r == own => return Some(self.clone()),
            (Rank::Finite(k), _) if k as usize <= self.levels.len() => {
                (self.levels[..k as usize].to_vec(), None)
            }
            (Rank::ArrowOmega, Rank::Omega) => (self.levels.clone(), None),
            _ => return None,
        };
        Some(Self::assemble(
            rank,
            self.branches.clone(),
            self.x0.clone(),
            levels,
            arrow,
        ))
    }
}

/// The underlying graph of a digraph: one branch per arc, the same
/// partitions, no polarity.
pub fn forget(d: &RankedDigraph) -> RankedGraph {
    let p = d.parts();
    RankedGraph::assemble(
        p.rank,
        p.arcs.clone(),
        p.v0.clone(),
        p.levels.iter().map(erase).collect(),
        p.arrow.as_ref().map(erase),
    )
}

/// The underlying nonstandard graph of a built nonstandard digraph: the
/// same classes and partitions with polarity erased.
pub fn forget_ns(ns: &NsDigraph) -> NsDigraph {
    let mut out = ns.clone();
    out.directed = false;
    for level in out.levels.iter_mut().chain(out.arrow.as_mut()) {
        for tip in &mut level.tips {
            tip.polarity = None;
        }
    }
    out
}

impl RankedStructure for RankedGraph {
    fn rank(&self) -> Rank {
        self.rank
    }

    fn finite_depth(&self) -> u32 {
        self.levels.len() as u32
    }

    fn elements(&self, kind: ElementKind) -> Vec<Element> {
        match kind {
            ElementKind::Arc => self.branches.iter().cloned().map(Element::Arc).collect(),
            ElementKind::End => self
                .branches
                .iter()
                .flat_map(|b| {
                    [Side::Source, Side::Sink].map(|s| Element::End(ArcEnd::new(b.clone(), s)))
                })
                .collect(),
            ElementKind::Tip(rank) => self
                .level(rank)
                .map(|l| l.tips.iter().cloned().map(Element::Tip).collect())
                .unwrap_or_default(),
        }
    }

    fn contains(&self, kind: ElementKind, element: &Element) -> bool {
        match (kind, element) {
            (ElementKind::Arc, Element::Arc(b)) => self.branches.contains(b),
            (ElementKind::End, Element::End(e)) => self.end_node.contains_key(e),
            (ElementKind::Tip(rank), Element::Tip(t)) => {
                self.nodes(rank).is_some_and(|m| m.contains_key(t))
            }
            _ => false,
        }
    }

    fn vertex_of(&self, kind: ElementKind, element: &Element) -> Option<usize> {
        match (kind, element) {
            (ElementKind::End, Element::End(e)) => self.end_node.get(e).copied(),
            (ElementKind::Tip(rank), Element::Tip(t)) => self.nodes(rank)?.get(t).copied(),
            _ => None,
        }
    }

    fn polarity(&self, _: ElementKind, _: &Element) -> Option<Polarity> {
        None
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
                .x0
                .iter()
                .map(|b| b.members.iter().cloned().map(Element::End).collect())
                .collect(),
            ElementKind::Tip(rank) => self
                .level(rank)
                .map(|l| {
                    l.nodes
                        .iter()
                        .map(|b| b.members.iter().cloned().map(Element::Tip).collect())
                        .collect()
                })
                .unwrap_or_default(),
        }
    }

    fn is_directed(&self) -> bool {
        false
    }
}
