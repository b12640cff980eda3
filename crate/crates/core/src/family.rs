//! Eventually periodic families of ranked structures and eventually periodic
//! element sequences.
//!
//! A family is a finite prefix followed by a repeating cycle, so every
//! pointwise question "at which n does this hold?" has an eventually
//! periodic answer. [`predicate_set`] computes that answer exactly by
//! evaluating one prefix and one common period.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::digraph::{Element, ElementKind, Rank, RankedDigraph};
use crate::epset::EpSet;
use crate::structure::RankedStructure;
use crate::ultrafilter::Ultrafilter;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("family cycle is empty")]
    EmptyCycle,
    #[error("unknown member `{0}`")]
    UnknownMember(String),
    #[error("cycle member `{name}` has rank {found}, family rank is {declared}")]
    CycleRank {
        name: String,
        found: Rank,
        declared: Rank,
    },
    #[error("sequence cycle is empty")]
    EmptySequenceCycle,
    #[error("sequence of kind {kind} holds element {element} of another kind")]
    KindMismatch { kind: ElementKind, element: Element },
    #[error("element {element} does not exist at position {position}")]
    MissingElement { element: Element, position: u64 },
    #[error("predicate failed at position {position}: {message}")]
    Predicate { position: u64, message: String },
}

/// An eventually periodic family `⟨D_n⟩`.
///
/// Position `n < N₀` maps to `prefix[n]`, and `n ≥ N₀` to
/// `cycle[(n − N₀) mod p]`. Members are named; the same member may appear
/// at several positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Family<S> {
    members: BTreeMap<String, S>,
    prefix: Vec<String>,
    cycle: Vec<String>,
    rank: Rank,
}

/// A family of directed members.
pub type FamilySpec = Family<RankedDigraph>;

impl<S: RankedStructure> Family<S> {
    /// Every cycle member must carry the declared rank; prefix members may
    /// differ (see [`Family::warnings`]).
    pub fn new(
        members: BTreeMap<String, S>,
        prefix: Vec<String>,
        cycle: Vec<String>,
        rank: Rank,
    ) -> Result<Self, FamilyError> {
        if cycle.is_empty() {
            return Err(FamilyError::EmptyCycle);
        }
        for name in prefix.iter().chain(&cycle) {
            if !members.contains_key(name) {
                return Err(FamilyError::UnknownMember(name.clone()));
            }
        }
        for name in &cycle {
            let found = members[name].rank();
            if found != rank {
                return Err(FamilyError::CycleRank {
                    name: name.clone(),
                    found,
                    declared: rank,
                });
            }
        }
        Ok(Family {
            members,
            prefix,
            cycle,
            rank,
        })
    }

    /// A constant family `⟨D⟩`.
    pub fn constant(name: impl Into<String>, member: S) -> Self {
        let name = name.into();
        let rank = member.rank();
        Family {
            members: BTreeMap::from([(name.clone(), member)]),
            prefix: Vec::new(),
            cycle: vec![name],
            rank,
        }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    /// `N₀`, the length of the prefix.
    pub fn threshold(&self) -> u64 {
        self.prefix.len() as u64
    }

    /// `p`, the length of the cycle.
    pub fn period(&self) -> u64 {
        self.cycle.len() as u64
    }

    pub fn members(&self) -> &BTreeMap<String, S> {
        &self.members
    }

    pub fn prefix_names(&self) -> &[String] {
        &self.prefix
    }

    pub fn cycle_names(&self) -> &[String] {
        &self.cycle
    }

    pub fn name_at(&self, n: u64) -> &str {
        let n0 = self.threshold();
        if n < n0 {
            &self.prefix[n as usize]
        } else {
            &self.cycle[((n - n0) % self.period()) as usize]
        }
    }

    /// The member `D_n`.
    pub fn at(&self, n: u64) -> &S {
        &self.members[self.name_at(n)]
    }

    /// Largest finite ditip depth among all members.
    pub fn finite_depth(&self) -> u32 {
        self.members
            .values()
            .map(RankedStructure::finite_depth)
            .max()
            .unwrap_or(0)
    }

    /// Positions whose member has a rank other than the family's. Such
    /// members are accepted but lack some vertex sets.
    pub fn warnings(&self) -> Vec<String> {
        self.prefix
            .iter()
            .enumerate()
            .filter(|(_, name)| self.members[*name].rank() != self.rank)
            .map(|(n, name)| {
                format!(
                    "position {n}: member `{name}` has rank {}, below family rank {}",
                    self.members[name].rank(),
                    self.rank
                )
            })
            .collect()
    }

    /// Applies `f` to every member, keeping positions and names.
    pub fn map<T: RankedStructure>(&self, f: impl Fn(&S) -> T) -> Family<T> {
        let members: BTreeMap<String, T> = self
            .members
            .iter()
            .map(|(k, v)| (k.clone(), f(v)))
            .collect();
        let rank = members
            .get(&self.cycle[0])
            .map_or(self.rank, RankedStructure::rank);
        Family {
            members,
            prefix: self.prefix.clone(),
            cycle: self.cycle.clone(),
            rank,
        }
    }

    /// The set of positions whose member satisfies `pred`.
    pub fn members_where(&self, mut pred: impl FnMut(&S) -> bool) -> EpSet {
        EpSet::from_fn(self.threshold(), self.period(), |n| pred(self.at(n)))
    }
}

/// An eventually periodic sequence of elements, possibly absent at some
/// positions.
///
/// Alignment is independent of any family: position `n < prefix.len()`
/// reads `prefix[n]`, later positions read the cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpSequence {
    kind: ElementKind,
    prefix: Vec<Option<Element>>,
    cycle: Vec<Option<Element>>,
}

impl EpSequence {
    pub fn new(
        kind: ElementKind,
        prefix: Vec<Option<Element>>,
        cycle: Vec<Option<Element>>,
    ) -> Result<Self, FamilyError> {
        if cycle.is_empty() {
            return Err(FamilyError::EmptySequenceCycle);
        }
        if let Some(e) = prefix
            .iter()
            .chain(&cycle)
            .flatten()
            .find(|e| !e.matches(kind))
        {
            return Err(FamilyError::KindMismatch {
                kind,
                element: e.clone(),
            });
        }
        Ok(EpSequence {
            kind,
            prefix,
            cycle,
        })
    }

    /// The constant sequence at `element`.
    pub fn constant(kind: ElementKind, element: Element) -> Result<Self, FamilyError> {
        Self::new(kind, Vec::new(), vec![Some(element)])
    }

    /// Builds a sequence from its values on `0..threshold + period`.
    pub fn from_fn(
        kind: ElementKind,
        threshold: u64,
        period: u64,
        mut f: impl FnMut(u64) -> Option<Element>,
    ) -> Result<Self, FamilyError> {
        let prefix = (0..threshold).map(&mut f).collect();
        let cycle = (threshold..threshold + period).map(f).collect();
        Self::new(kind, prefix, cycle)
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn threshold(&self) -> u64 {
        self.prefix.len() as u64
    }

    pub fn period(&self) -> u64 {
        self.cycle.len() as u64
    }

    pub fn prefix(&self) -> &[Option<Element>] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Option<Element>] {
        &self.cycle
    }

    pub fn at(&self, n: u64) -> Option<&Element> {
        let n0 = self.threshold();
        if n < n0 {
            self.prefix[n as usize].as_ref()
        } else {
            self.cycle[((n - n0) % self.period()) as usize].as_ref()
        }
    }

    /// Replaces every element through `f`, keeping the layout.
    pub fn map_elements(&self, kind: ElementKind, f: impl Fn(&Element) -> Element) -> Self {
        let conv = |v: &Option<Element>| v.as_ref().map(&f);
        EpSequence {
            kind,
            prefix: self.prefix.iter().map(conv).collect(),
            cycle: self.cycle.iter().map(conv).collect(),
        }
    }

    /// Ordering key of canonical representatives: the length of the
    /// minimal cycle, then values position by position over one prefix and
    /// one cycle.
    pub fn order_key(&self) -> (u64, u64, Vec<Option<&Element>>) {
        let period = minimal_period(&self.cycle);
        let values = (0..self.threshold() + period).map(|n| self.at(n)).collect();
        (period, self.threshold(), values)
    }

    /// Every named element must exist in the member at its position.
    pub fn check_against<S: RankedStructure>(&self, family: &Family<S>) -> Result<(), FamilyError> {
        let (threshold, period) = window(family, &[self]);
        for n in 0..threshold + period {
            if let Some(e) = self.at(n) {
                if !family.at(n).contains(self.kind, e) {
                    return Err(FamilyError::MissingElement {
                        element: e.clone(),
                        position: n,
                    });
                }
            }
        }
        Ok(())
    }
}

fn minimal_period(cycle: &[Option<Element>]) -> u64 {
    let p = cycle.len();
    (1..=p)
        .filter(|d| p.is_multiple_of(*d))
        .find(|&d| (0..p).all(|i| cycle[i] == cycle[i % d]))
        .unwrap_or(p) as u64
}

impl fmt::Display for EpSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |vals: &[Option<Element>]| {
            vals.iter()
                .map(|v| {
                    v.as_ref()
                        .map_or_else(|| "_".to_string(), Element::to_string)
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(
            f,
            "prefix [{}]; cycle [{}];",
            show(&self.prefix),
            show(&self.cycle)
        )
    }
}

/// Common threshold and period of a family and some sequences.
pub fn window<S>(family: &Family<S>, seqs: &[&EpSequence]) -> (u64, u64) {
    seqs.iter().fold(
        (family.prefix.len() as u64, family.cycle.len() as u64),
        |(t, p), s| (t.max(s.threshold()), p.lcm(&s.period())),
    )
}

/// `{n : pred(n, D_n, values of seqs at n)}` as an exact eventually periodic
/// set.
///
/// `pred` must depend on `n` only through the member and the sequence
/// values; it is evaluated on one prefix and one common period.
pub fn predicate_set<S, E: fmt::Display>(
    family: &Family<S>,
    seqs: &[&EpSequence],
    mut pred: impl FnMut(u64, &S, &[Option<&Element>]) -> Result<bool, E>,
) -> Result<EpSet, FamilyError>
where
    S: RankedStructure,
{
    let (threshold, period) = window(family, seqs);
    let mut values = Vec::with_capacity((threshold + period) as usize);
    let mut at = Vec::with_capacity(seqs.len());
    for n in 0..threshold + period {
        at.clear();
        at.extend(seqs.iter().map(|s| s.at(n)));
        let v = pred(n, family.at(n), &at).map_err(|e| FamilyError::Predicate {
            position: n,
            message: e.to_string(),
        })?;
        values.push(v);
    }
    Ok(EpSet::from_fn(threshold, period, |n| values[n as usize]))
}

/// Same as [`predicate_set`] for predicates that cannot fail.
pub fn index_set<S: RankedStructure>(
    family: &Family<S>,
    seqs: &[&EpSequence],
    mut pred: impl FnMut(&S, &[Option<&Element>]) -> bool,
) -> EpSet {
    predicate_set::<S, std::convert::Infallible>(family, seqs, |_, d, v| Ok(pred(d, v)))
        .expect("infallible predicate")
}

/// Positions where the sequence names an element of its kind that exists in
/// the member there.
pub fn presence_set<S: RankedStructure>(seq: &EpSequence, family: &Family<S>) -> EpSet {
    index_set(family, &[seq], |d, v| {
        v[0].is_some_and(|e| d.contains(seq.kind(), e))
    })
}

/// Whether the sequence names a genuine element almost everywhere.
pub fn seq_valid<S: RankedStructure>(
    seq: &EpSequence,
    family: &Family<S>,
    oracle: &dyn Ultrafilter,
) -> bool {
    oracle.decide(&presence_set(seq, family))
}
