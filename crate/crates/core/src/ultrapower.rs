//! Nonstandard elements, their polarity and shorting, and the assembled
//! nonstandard digraphs.
//!
//! A nonstandard element is the class of an element sequence modulo
//! agreement on a set the ultrafilter accepts. Every relation between
//! classes is decided by computing the exact index set where the
//! standard relation holds and handing it to the oracle.
//!
//! Materializing classes needs a finite universe. At resolution `P` (a
//! multiple of the family period) the universe is every sequence that
//! follows the family prefix position by position and then repeats with
//! cycle length `P`. The prefix positions and the `P` cycle residues cut ℕ
//! into finitely many slots; the ultrafilter accepts exactly one of them,
//! the governing slot, and two sequences of the universe are equal a.e.
//! iff they agree there. Classes at resolution `P` are therefore in
//! bijection with the elements of the member at the governing slot.

use std::fmt;

use thiserror::Error;

use crate::digraph::{Element, ElementKind, Polarity, Rank, Side};
use crate::epset::EpSet;
use crate::family::{index_set, presence_set, EpSequence, Family, FamilyError};
use crate::structure::RankedStructure;
use crate::ultrafilter::Ultrafilter;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UltrapowerError {
    #[error("sequences of different kinds: {0} vs {1}")]
    KindMismatch(ElementKind, ElementKind),
    #[error("sequence of kind {0} is not present almost everywhere")]
    InvalidSequence(ElementKind),
    #[error("elements of kind {0} are not partitioned into vertices")]
    NotShortable(ElementKind),
    #[error("polarity is only defined for ditips of a directed family, not {0}")]
    NoPolarity(ElementKind),
    #[error("resolution {resolution} is not a positive multiple of the family period {period}")]
    Resolution { resolution: u64, period: u64 },
    #[error("rank {requested} exceeds the family rank {available}")]
    RankTooHigh { requested: Rank, available: Rank },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("oracle accepted none of the slots at resolution {0}")]
    NoGoverningSlot(u64),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// One of the cells the positions of ℕ fall into at a given resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    /// The single prefix position `n < N₀`.
    Prefix(u64),
    /// Positions `n ≥ N₀` with `(n − N₀) mod P = j`.
    Cycle(u64),
}

impl Slot {
    /// The least position in the slot.
    pub fn position(self, threshold: u64) -> u64 {
        match self {
            Slot::Prefix(n) => n,
            Slot::Cycle(j) => threshold + j,
        }
    }

    pub fn set(self, threshold: u64, resolution: u64) -> EpSet {
        match self {
            Slot::Prefix(n) => EpSet::finite([n]),
            Slot::Cycle(j) => EpSet::from_fn(threshold, resolution, |n| {
                n >= threshold && (n - threshold) % resolution == j
            }),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Prefix(n) => write!(f, "prefix position {n}"),
            Slot::Cycle(j) => write!(f, "cycle residue {j}"),
        }
    }
}

/// A materialized nonstandard element: its canonical representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsClass {
    pub rep: EpSequence,
    /// Value of the representative at the governing slot.
    pub value: Element,
    /// Nonstandard polarity, for ditips of directed families.
    pub polarity: Option<Polarity>,
    pub label: String,
}

/// A nonstandard vertex: the shorting class of a nonstandard element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsVertex {
    pub canonical: EpSequence,
    pub label: String,
    pub rank: Rank,
    /// Indices of the member classes within the enclosing level; empty for
    /// vertices computed directly from an arbitrary sequence.
    pub members: Vec<usize>,
}

/// Nonstandard ditips of one rank and their partition into nonstandard
/// vertices of the next rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsLevel {
    pub tip_rank: Rank,
    pub tips: Vec<NsClass>,
    pub vertices: Vec<NsVertex>,
}

/// The enumerated definable fragment of a nonstandard digraph at one
/// resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsDigraph {
    pub rank: Rank,
    pub resolution: u64,
    pub oracle: String,
    pub directed: bool,
    pub governing: Slot,
    pub arcs: Vec<NsClass>,
    pub ends: Vec<NsClass>,
    /// For each end class: its arc class and side.
    pub end_arcs: Vec<(usize, Side)>,
    pub v0: Vec<NsVertex>,
    /// `levels[k]` holds the rank-`k` nonstandard ditips and `*V^{k+1}`.
    pub levels: Vec<NsLevel>,
    /// Arrow-rank ditips and `*V^ω`, for omega builds.
    pub arrow: Option<NsLevel>,
}

impl NsDigraph {
    pub fn level(&self, tip_rank: Rank) -> Option<&NsLevel> {
        match tip_rank {
            Rank::Finite(k) => self.levels.get(k as usize),
            Rank::ArrowOmega => self.arrow.as_ref(),
            Rank::Omega => None,
        }
    }

    pub fn all_levels(&self) -> impl Iterator<Item = &NsLevel> {
        self.levels.iter().chain(self.arrow.as_ref())
    }

    /// `(name, count)` for every class set, in rank order.
    pub fn class_counts(&self) -> Vec<(String, usize)> {
        let mut out = vec![
            ("arcs".to_string(), self.arcs.len()),
            ("arc-ends".to_string(), self.ends.len()),
            ("V0".to_string(), self.v0.len()),
        ];
        for level in self.all_levels() {
            out.push((format!("T{}", level.tip_rank), level.tips.len()));
            out.push((
                format!("V{}", vertex_rank(level.tip_rank)),
                level.vertices.len(),
            ));
        }
        out
    }
}

/// Rank of the vertices built from elements of `tip_rank`.
pub fn vertex_rank(tip_rank: Rank) -> Rank {
    match tip_rank {
        Rank::Finite(k) => Rank::Finite(k + 1),
        Rank::ArrowOmega | Rank::Omega => Rank::Omega,
    }
}

fn class_label(value: &Element, resolution: u64) -> String {
    format!("[{value}@{resolution}]")
}

/// The ultrapower of a family under a fixed oracle.
pub struct Ultrapower<'a, S> {
    family: &'a Family<S>,
    oracle: &'a dyn Ultrafilter,
}

impl<'a, S: RankedStructure> Ultrapower<'a, S> {
    pub fn new(family: &'a Family<S>, oracle: &'a dyn Ultrafilter) -> Self {
        Ultrapower { family, oracle }
    }

    pub fn family(&self) -> &Family<S> {
        self.family
    }

    pub fn oracle(&self) -> &dyn Ultrafilter {
        self.oracle
    }

    fn directed(&self) -> bool {
        self.family.at(0).is_directed()
    }

    fn require_valid(&self, s: &EpSequence) -> Result<(), UltrapowerError> {
        if self.oracle.decide(&presence_set(s, self.family)) {
            Ok(())
        } else {
            Err(UltrapowerError::InvalidSequence(s.kind()))
        }
    }

    fn require_pair(&self, s: &EpSequence, t: &EpSequence) -> Result<(), UltrapowerError> {
        if s.kind() != t.kind() {
            return Err(UltrapowerError::KindMismatch(s.kind(), t.kind()));
        }
        self.require_valid(s)?;
        self.require_valid(t)
    }

    /// `{n : s_n = t_n}`, counting absent positions as disagreement.
    pub fn agreement_set(&self, s: &EpSequence, t: &EpSequence) -> EpSet {
        let kind = s.kind();
        index_set(self.family, &[s, t], |d, v| match (v[0], v[1]) {
            (Some(a), Some(b)) => a == b && d.contains(kind, a),
            _ => false,
        })
    }

    /// `{n : s_n ≍ t_n}`: both present and in one next-rank vertex.
    pub fn shorting_set(&self, s: &EpSequence, t: &EpSequence) -> EpSet {
        let kind = s.kind();
        index_set(self.family, &[s, t], |d, v| match (v[0], v[1]) {
            (Some(a), Some(b)) => match (d.vertex_of(kind, a), d.vertex_of(kind, b)) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
            _ => false,
        })
    }

    /// `{n : s_n is an intip}`.
    pub fn intip_set(&self, s: &EpSequence) -> EpSet {
        let kind = s.kind();
        index_set(self.family, &[s], |d, v| {
            v[0].is_some_and(|e| d.polarity(kind, e) == Some(Polarity::Intip))
        })
    }

    pub fn ns_equal(&self, s: &EpSequence, t: &EpSequence) -> Result<bool, UltrapowerError> {
        self.require_pair(s, t)?;
        Ok(self.oracle.decide(&self.agreement_set(s, t)))
    }

    pub fn ns_polarity(&self, s: &EpSequence) -> Result<Polarity, UltrapowerError> {
        if !matches!(s.kind(), ElementKind::Tip(_)) || !self.directed() {
            return Err(UltrapowerError::NoPolarity(s.kind()));
        }
        self.require_valid(s)?;
        Ok(if self.oracle.decide(&self.intip_set(s)) {
            Polarity::Intip
        } else {
            Polarity::Outtip
        })
    }

    /// Shorting of nonstandard ditips (or, for arc ends, lying in a common
    /// nonstandard 0-vertex).
    pub fn ns_shorted(&self, s: &EpSequence, t: &EpSequence) -> Result<bool, UltrapowerError> {
        if matches!(s.kind(), ElementKind::Arc) {
            return Err(UltrapowerError::NotShortable(s.kind()));
        }
        self.require_pair(s, t)?;
        Ok(self.oracle.decide(&self.shorting_set(s, t)))
    }

    /// Shorting computed from two representative pairs must agree whenever
    /// the pairs denote the same nonstandard ditips.
    pub fn check_independence(
        &self,
        s: &EpSequence,
        s_alt: &EpSequence,
        t: &EpSequence,
        t_alt: &EpSequence,
    ) -> Result<bool, UltrapowerError> {
        if !self.ns_equal(s, s_alt)? {
            return Err(UltrapowerError::Precondition(
                "first pair of representatives differ".into(),
            ));
        }
        if !self.ns_equal(t, t_alt)? {
            return Err(UltrapowerError::Precondition(
                "second pair of representatives differ".into(),
            ));
        }
        Ok(self.ns_shorted(s, t)? == self.ns_shorted(s_alt, t_alt)?)
    }

    fn check_resolution(&self, resolution: u64) -> Result<(), UltrapowerError> {
        let period = self.family.period();
        if resolution == 0 || !resolution.is_multiple_of(period) {
            return Err(UltrapowerError::Resolution { resolution, period });
        }
        Ok(())
    }

    /// The slot the oracle accepts at this resolution.
    pub fn governing_slot(&self, resolution: u64) -> Result<Slot, UltrapowerError> {
        self.check_resolution(resolution)?;
        let n0 = self.family.threshold();
        (0..n0)
            .map(Slot::Prefix)
            .chain((0..resolution).map(Slot::Cycle))
            .find(|slot| self.oracle.decide(&slot.set(n0, resolution)))
            .ok_or(UltrapowerError::NoGoverningSlot(resolution))
    }

    /// Values a universe sequence may take at position `n`: the elements of
    /// `D_n`, or only "absent" when `D_n` has none.
    fn allowed(&self, kind: ElementKind, n: u64) -> Vec<Option<Element>> {
        let mut elems = self.family.at(n).elements(kind);
        if elems.is_empty() {
            return vec![None];
        }
        elems.sort();
        elems.into_iter().map(Some).collect()
    }

    /// The least universe sequence (by [`EpSequence::order_key`]) whose value
    /// at `slot` is `value`.
    fn canonical_rep(
        &self,
        kind: ElementKind,
        value: &Element,
        slot: Slot,
        resolution: u64,
    ) -> Result<EpSequence, UltrapowerError> {
        let n0 = self.family.threshold();
        let prefix: Vec<Option<Element>> = (0..n0)
            .map(|n| {
                if slot == Slot::Prefix(n) {
                    Some(value.clone())
                } else {
                    self.allowed(kind, n).swap_remove(0)
                }
            })
            .collect();
        let cycle_allowed: Vec<Vec<Option<Element>>> = (0..resolution)
            .map(|j| self.allowed(kind, n0 + j))
            .collect();
        for d in (1..=resolution).filter(|d| resolution.is_multiple_of(*d)) {
            let mut cycle = Vec::with_capacity(d as usize);
            for r in 0..d {
                let mut common = cycle_allowed[r as usize].clone();
                for j in (r..resolution).step_by(d as usize).skip(1) {
                    common.retain(|v| cycle_allowed[j as usize].contains(v));
                }
                let pick = match slot {
                    Slot::Cycle(j) if j % d == r => {
                        let want = Some(value.clone());
                        common.contains(&want).then_some(want)
                    }
                    _ => common.into_iter().next(),
                };
                match pick {
                    Some(v) => cycle.push(v),
                    None => break,
                }
            }
            if cycle.len() == d as usize {
                return Ok(EpSequence::new(kind, prefix, cycle)?);
            }
        }
        unreachable!("the full resolution always admits a representative")
    }

    /// Nonstandard classes of `kind` reachable at `resolution`, in canonical
    /// order.
    pub fn enumerate(
        &self,
        kind: ElementKind,
        resolution: u64,
    ) -> Result<Vec<NsClass>, UltrapowerError> {
        let slot = self.governing_slot(resolution)?;
        self.enumerate_at(kind, resolution, slot)
    }

    fn enumerate_at(
        &self,
        kind: ElementKind,
        resolution: u64,
        slot: Slot,
    ) -> Result<Vec<NsClass>, UltrapowerError> {
        let member = self.family.at(slot.position(self.family.threshold()));
        let mut classes = Vec::new();
        for value in member.elements(kind) {
            let rep = self.canonical_rep(kind, &value, slot, resolution)?;
            let polarity = match kind {
                ElementKind::Tip(_) if self.directed() => Some(self.ns_polarity(&rep)?),
                _ => None,
            };
            classes.push(NsClass {
                label: class_label(&value, resolution),
                rep,
                value,
                polarity,
            });
        }
        classes.sort_by(|a, b| a.rep.order_key().cmp(&b.rep.order_key()));
        Ok(classes)
    }

    /// Groups classes into nonstandard vertices by shorting.
    fn partition(&self, classes: &[NsClass], rank: Rank) -> Result<Vec<NsVertex>, UltrapowerError> {
        let mut vertices: Vec<NsVertex> = Vec::new();
        for (i, class) in classes.iter().enumerate() {
            let mut home = None;
            for (v, vertex) in vertices.iter().enumerate() {
                if self.ns_shorted(&classes[vertex.members[0]].rep, &class.rep)? {
                    home = Some(v);
                    break;
                }
            }
            match home {
                Some(v) => vertices[v].members.push(i),
                None => vertices.push(NsVertex {
                    canonical: class.rep.clone(),
                    label: class.label.clone(),
                    rank,
                    members: vec![i],
                }),
            }
        }
        Ok(vertices)
    }

    /// The nonstandard vertex containing the class of `s`.
    pub fn ns_vertex_of(
        &self,
        s: &EpSequence,
        resolution: u64,
    ) -> Result<NsVertex, UltrapowerError> {
        let rank = match s.kind() {
            ElementKind::Arc => return Err(UltrapowerError::NotShortable(s.kind())),
            ElementKind::End => Rank::Finite(0),
            ElementKind::Tip(r) => vertex_rank(r),
        };
        self.require_valid(s)?;
        let classes = self.enumerate(s.kind(), resolution)?;
        let mut members = Vec::new();
        let mut in_universe = false;
        for (i, class) in classes.iter().enumerate() {
            if self.ns_shorted(&class.rep, s)? {
                members.push(i);
                in_universe |= self.ns_equal(&class.rep, s)?;
            }
        }
        let (canonical, label) = match members.first() {
            // Classes are sorted, so the first member is the least.
            Some(&i) if in_universe || s.order_key() >= classes[i].rep.order_key() => {
                (classes[i].rep.clone(), classes[i].label.clone())
            }
            _ => (s.clone(), format!("[{s}]")),
        };
        Ok(NsVertex {
            canonical,
            label,
            rank,
            members,
        })
    }

    /// Rank-`tip_rank` nonstandard ditips and their vertices.
    pub fn level(&self, tip_rank: Rank, resolution: u64) -> Result<NsLevel, UltrapowerError> {
        let slot = self.governing_slot(resolution)?;
        self.level_at(tip_rank, resolution, slot)
    }

    fn level_at(
        &self,
        tip_rank: Rank,
        resolution: u64,
        slot: Slot,
    ) -> Result<NsLevel, UltrapowerError> {
        let tips = self.enumerate_at(ElementKind::Tip(tip_rank), resolution, slot)?;
        let vertices = self.partition(&tips, vertex_rank(tip_rank))?;
        Ok(NsLevel {
            tip_rank,
            tips,
            vertices,
        })
    }

    /// Finite ditip ranks a build of `rank` materializes.
    fn finite_levels(&self, rank: Rank) -> Result<u32, UltrapowerError> {
        let available = self.family.rank();
        let depth = self.family.finite_depth();
        let too_high = || UltrapowerError::RankTooHigh {
            requested: rank,
            available,
        };
        match (rank, available) {
            (Rank::Finite(mu), Rank::Finite(nu)) if mu <= nu => Ok(mu),
            (Rank::Finite(mu), Rank::ArrowOmega | Rank::Omega) if mu <= depth => Ok(mu),
            (Rank::ArrowOmega, Rank::ArrowOmega | Rank::Omega) => Ok(depth),
            (Rank::Omega, Rank::Omega) => Ok(depth),
            _ => Err(too_high()),
        }
    }

    /// Builds `*D^rank` at the given resolution.
    ///
    /// Arrow and omega builds materialize every finite rank up to the
    /// deepest one declared in the family; further ranks are available
    /// through [`Ultrapower::level`].
    pub fn build(&self, rank: Rank, resolution: u64) -> Result<NsDigraph, UltrapowerError> {
        let depth = self.finite_levels(rank)?;
        let slot = self.governing_slot(resolution)?;
        let arcs = self.enumerate_at(ElementKind::Arc, resolution, slot)?;
        let ends = self.enumerate_at(ElementKind::End, resolution, slot)?;
        let mut end_arcs = Vec::with_capacity(ends.len());
        for end in &ends {
            let arc_seq = end.rep.map_elements(ElementKind::Arc, |e| match e {
                Element::End(e) => Element::Arc(e.arc.clone()),
                other => other.clone(),
            });
            let mut arc = None;
            for (i, a) in arcs.iter().enumerate() {
                if self.ns_equal(&a.rep, &arc_seq)? {
                    arc = Some(i);
                    break;
                }
            }
            let arc = arc.ok_or_else(|| {
                UltrapowerError::Precondition(format!("arc end {} has no arc class", end.label))
            })?;
            let source = index_set(
                self.family,
                &[&end.rep],
                |_, v| matches!(v[0], Some(Element::End(e)) if e.side == Side::Source),
            );
            let side = if self.oracle.decide(&source) {
                Side::Source
            } else {
                Side::Sink
            };
            end_arcs.push((arc, side));
        }
        let v0 = self.partition(&ends, Rank::Finite(0))?;
        let levels = (0..depth)
            .map(|k| self.level_at(Rank::Finite(k), resolution, slot))
            .collect::<Result<Vec<_>, _>>()?;
        let arrow = if rank == Rank::Omega {
            Some(self.level_at(Rank::ArrowOmega, resolution, slot)?)
        } else {
            None
        };
        Ok(NsDigraph {
            rank,
            resolution,
            oracle: self.oracle.describe(),
            directed: self.directed(),
            governing: slot,
            arcs,
            ends,
            end_arcs,
            v0,
            levels,
            arrow,
        })
    }
}

/// The constant sequence at `element`, which must belong to `member`.
pub fn standard_embedding<S: RankedStructure>(
    member: &S,
    kind: ElementKind,
    element: &Element,
) -> Result<EpSequence, UltrapowerError> {
    if !member.contains(kind, element) {
        return Err(FamilyError::MissingElement {
            element: element.clone(),
            position: 0,
        }
        .into());
    }
    Ok(EpSequence::constant(kind, element.clone())?)
}
