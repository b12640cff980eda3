//! Standard ranked digraphs: arcs, 0-vertices over arc ends, and for each
//! rank a declared set of ditips partitioned into next-rank vertices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Rank of a digraph, vertex set or ditip set.
///
/// The derived order is the ordinal one: every finite rank precedes the
/// arrow rank, which precedes `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(u32),
    ArrowOmega,
    Omega,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(k) => write!(f, "{k}"),
            Rank::ArrowOmega => f.write_str("warrow"),
            Rank::Omega => f.write_str("omega"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rank `{0}` (expected a natural number, `warrow` or `omega`)")]
pub struct RankParseError(pub String);

impl FromStr for Rank {
    type Err = RankParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "warrow" => Ok(Rank::ArrowOmega),
            "omega" => Ok(Rank::Omega),
            _ => s
                .parse()
                .map(Rank::Finite)
                .map_err(|_| RankParseError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Source,
    Sink,
}

impl Side {
    pub fn suffix(self) -> &'static str {
        match self {
            Side::Source => "src",
            Side::Sink => "snk",
        }
    }
}

/// One of the two ends of an arc.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcEnd {
    pub arc: String,
    pub side: Side,
}

impl ArcEnd {
    pub fn new(arc: impl Into<String>, side: Side) -> Self {
        ArcEnd {
            arc: arc.into(),
            side,
        }
    }
}

impl fmt::Display for ArcEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.arc, self.side.suffix())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Intip,
    Outtip,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Intip => "intip",
            Polarity::Outtip => "outtip",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ditip {
    pub id: String,
    pub rank: Rank,
    pub polarity: Polarity,
}

/// Which family of elements a sequence or class ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Arc,
    End,
    /// Ditips of the given rank (finite or arrow).
    Tip(Rank),
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementKind::Arc => f.write_str("arc"),
            ElementKind::End => f.write_str("end"),
            ElementKind::Tip(r) => write!(f, "tip rank {r}"),
        }
    }
}

/// A single standard element. Tips carry no rank; it comes from the kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Arc(String),
    End(ArcEnd),
    Tip(String),
}

impl Element {
    pub fn matches(&self, kind: ElementKind) -> bool {
        matches!(
            (self, kind),
            (Element::Arc(_), ElementKind::Arc)
                | (Element::End(_), ElementKind::End)
                | (Element::Tip(_), ElementKind::Tip(_))
        )
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Arc(a) => f.write_str(a),
            Element::End(e) => e.fmt(f),
            Element::Tip(t) => f.write_str(t),
        }
    }
}

/// A named block of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block<T> {
    pub name: String,
    pub members: Vec<T>,
}

impl<T> Block<T> {
    pub fn new(name: impl Into<String>, members: impl IntoIterator<Item = T>) -> Self {
        Block {
            name: name.into(),
            members: members.into_iter().collect(),
        }
    }
}

/// Declared ditips of one rank together with the partition of them into
/// vertices of the next rank.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TipLevel {
    pub tips: Vec<(String, Polarity)>,
    pub vertices: Vec<Block<String>>,
}

/// Raw, unvalidated description of a ranked digraph.
///
/// `levels[k]` holds the rank-`k` ditips and the partition `V^{k+1}`;
/// `arrow` holds the arrow-rank ditips and `V^ω` (omega digraphs only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigraphParts {
    pub rank: Rank,
    pub arcs: Vec<String>,
    pub v0: Vec<Block<ArcEnd>>,
    pub levels: Vec<TipLevel>,
    pub arrow: Option<TipLevel>,
}

impl DigraphParts {
    pub fn new(rank: Rank) -> Self {
        DigraphParts {
            rank,
            arcs: Vec::new(),
            v0: Vec::new(),
            levels: Vec::new(),
            arrow: None,
        }
    }

    pub fn level_mut(&mut self, rank: Rank) -> &mut TipLevel {
        match rank {
            Rank::Finite(k) => {
                let k = k as usize;
                if self.levels.len() <= k {
                    self.levels.resize_with(k + 1, TipLevel::default);
                }
                &mut self.levels[k]
            }
            Rank::ArrowOmega => self.arrow.get_or_insert_with(TipLevel::default),
            Rank::Omega => panic!("no ditips of rank omega"),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateArc(String),
    UnknownArc {
        vertex: String,
        arc: String,
    },
    UncoveredEnd(ArcEnd),
    EndInSeveralVertices(ArcEnd),
    EmptyVertex {
        rank: Rank,
        vertex: String,
    },
    DuplicateVertexName {
        rank: Rank,
        vertex: String,
    },
    DuplicateDitip {
        rank: Rank,
        id: String,
    },
    UnknownDitip {
        rank: Rank,
        vertex: String,
        id: String,
    },
    UncoveredDitip {
        rank: Rank,
        id: String,
    },
    DitipInSeveralVertices {
        rank: Rank,
        id: String,
    },
    EmptyDitipSet {
        rank: Rank,
    },
    DitipsAboveRank {
        rank: Rank,
    },
    MissingOmegaPartition,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateArc(a) => write!(f, "duplicate arc {a}"),
            Violation::UnknownArc { vertex, arc } => {
                write!(f, "0-vertex {vertex} mentions unknown arc {arc}")
            }
            Violation::UncoveredEnd(e) => write!(f, "uncovered arc end {e}"),
            Violation::EndInSeveralVertices(e) => {
                write!(f, "arc end {e} lies in more than one 0-vertex")
            }
            Violation::EmptyVertex { rank, vertex } => {
                write!(f, "empty {rank}-vertex {vertex}")
            }
            Violation::DuplicateVertexName { rank, vertex } => {
                write!(f, "duplicate {rank}-vertex name {vertex}")
            }
            Violation::DuplicateDitip { rank, id } => {
                write!(f, "duplicate ditip {id} at rank {rank}")
            }
            Violation::UnknownDitip { rank, vertex, id } => {
                write!(
                    f,
                    "vertex {vertex} above rank {rank} mentions unknown ditip {id}"
                )
            }
            Violation::UncoveredDitip { rank, id } => {
                write!(f, "uncovered ditip {id} at rank {rank}")
            }
            Violation::DitipInSeveralVertices { rank, id } => {
                write!(f, "ditip {id} at rank {rank} lies in more than one vertex")
            }
            Violation::EmptyDitipSet { rank } => {
                write!(f, "empty ditip set below rank at rank {rank}")
            }
            Violation::DitipsAboveRank { rank } => {
                write!(
                    f,
                    "ditips declared at rank {rank}, not below the digraph rank"
                )
            }
            Violation::MissingOmegaPartition => {
                f.write_str("omega digraph declares no arrow-rank ditips")
            }
        }
    }
}

/// Outcome of structural validation. Empty iff the digraph is well formed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_clean() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_partition<T: Clone + Ord + fmt::Debug>(
    universe: &BTreeSet<T>,
    blocks: &[Block<T>],
    rank: Rank,
    out: &mut Vec<Violation>,
    unknown: impl Fn(&str, &T) -> Violation,
    uncovered: impl Fn(&T) -> Violation,
    repeated: impl Fn(&T) -> Violation,
) {
    let mut seen = BTreeSet::new();
    let mut repeated_once = BTreeSet::new();
    let mut names = BTreeSet::new();
    for block in blocks {
        if !names.insert(&block.name) {
            out.push(Violation::DuplicateVertexName {
                rank,
                vertex: block.name.clone(),
            });
        }
        if block.members.is_empty() {
            out.push(Violation::EmptyVertex {
                rank,
                vertex: block.name.clone(),
            });
        }
        for m in &block.members {
            if !universe.contains(m) {
                out.push(unknown(&block.name, m));
            } else if !seen.insert(m.clone()) && repeated_once.insert(m.clone()) {
                out.push(repeated(m));
            }
        }
    }
    for m in universe.difference(&seen) {
        out.push(uncovered(m));
    }
}

fn check_level(level: &TipLevel, rank: Rank, vertex_rank: Rank, out: &mut Vec<Violation>) {
    let mut ids = BTreeSet::new();
    for (id, _) in &level.tips {
        if !ids.insert(id.clone()) {
            out.push(Violation::DuplicateDitip {
                rank,
                id: id.clone(),
            });
        }
    }
    if ids.is_empty() {
        out.push(Violation::EmptyDitipSet { rank });
    }
    check_partition(
        &ids,
        &level.vertices,
        vertex_rank,
        out,
        |vertex, id| Violation::UnknownDitip {
            rank,
            vertex: vertex.to_string(),
            id: id.clone(),
        },
        |id| Violation::UncoveredDitip {
            rank,
            id: id.clone(),
        },
        |id| Violation::DitipInSeveralVertices {
            rank,
            id: id.clone(),
        },
    );
}

/// Checks every structural invariant of a ranked digraph description.
pub fn validate(parts: &DigraphParts) -> ValidationReport {
    let mut out = Vec::new();
    let mut arcs = BTreeSet::new();
    for a in &parts.arcs {
        if !arcs.insert(a.clone()) {
            out.push(Violation::DuplicateArc(a.clone()));
        }
    }
    let ends: BTreeSet<ArcEnd> = arcs
        .iter()
        .flat_map(|a| {
            [
                ArcEnd::new(a.clone(), Side::Source),
                ArcEnd::new(a.clone(), Side::Sink),
            ]
        })
        .collect();
    let mut v0_out = Vec::new();
    check_partition(
        &ends,
        &parts.v0,
        Rank::Finite(0),
        &mut v0_out,
        |vertex, end| Violation::UnknownArc {
            vertex: vertex.to_string(),
            arc: end.arc.clone(),
        },
        |end| Violation::UncoveredEnd(end.clone()),
        |end| Violation::EndInSeveralVertices(end.clone()),
    );
    out.extend(v0_out);

    let required = match parts.rank {
        Rank::Finite(mu) => mu as usize,
        Rank::ArrowOmega | Rank::Omega => parts.levels.len(),
    };
    for k in 0..parts.levels.len().max(required) {
        let rank = Rank::Finite(k as u32);
        match parts.levels.get(k) {
            Some(_) if k >= required => out.push(Violation::DitipsAboveRank { rank }),
            Some(level) => check_level(level, rank, Rank::Finite(k as u32 + 1), &mut out),
            None => out.push(Violation::EmptyDitipSet { rank }),
        }
    }
    match (&parts.arrow, parts.rank) {
        (Some(level), Rank::Omega) => check_level(level, Rank::ArrowOmega, Rank::Omega, &mut out),
        (Some(_), _) => out.push(Violation::DitipsAboveRank {
            rank: Rank::ArrowOmega,
        }),
        (None, Rank::Omega) => out.push(Violation::MissingOmegaPartition),
        (None, _) => {}
    }
    ValidationReport { violations: out }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DigraphError {
    #[error("digraph is malformed:\n{0}")]
    Invalid(ValidationReport),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(Rank, Rank),
    #[error("no ditips of rank {0} in this digraph")]
    NoSuchLevel(Rank),
    #[error("unknown ditip {id} at rank {rank}")]
    UnknownDitip { rank: Rank, id: String },
    #[error("rank {requested} exceeds the available rank {available}")]
    RankTooHigh { requested: Rank, available: Rank },
}

#[derive(Debug, Clone, Default)]
struct LevelIndex {
    polarity: HashMap<String, Polarity>,
    vertex: HashMap<String, usize>,
}

impl LevelIndex {
    fn build(level: &TipLevel) -> Self {
        LevelIndex {
            polarity: level.tips.iter().cloned().collect(),
            vertex: level
                .vertices
                .iter()
                .enumerate()
                .flat_map(|(i, b)| b.members.iter().map(move |m| (m.clone(), i)))
                .collect(),
        }
    }
}

/// A validated ranked digraph.
#[derive(Debug, Clone)]
pub struct RankedDigraph {
    parts: DigraphParts,
    arc_set: BTreeSet<String>,
    end_vertex: HashMap<ArcEnd, usize>,
    levels: Vec<LevelIndex>,
    arrow: Option<LevelIndex>,
}

impl PartialEq for RankedDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Eq for RankedDigraph {}

impl RankedDigraph {
    pub fn new(parts: DigraphParts) -> Result<Self, DigraphError> {
        let report = validate(&parts);
        if !report.is_clean() {
            return Err(DigraphError::Invalid(report));
        }
        let end_vertex = parts
            .v0
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.members.iter().map(move |e| (e.clone(), i)))
            .collect();
        Ok(RankedDigraph {
            arc_set: parts.arcs.iter().cloned().collect(),
            end_vertex,
            levels: parts.levels.iter().map(LevelIndex::build).collect(),
            arrow: parts.arrow.as_ref().map(LevelIndex::build),
            parts,
        })
    }

    pub fn parts(&self) -> &DigraphParts {
        &self.parts
    }

    pub fn into_parts(self) -> DigraphParts {
        self.parts
    }

    pub fn rank(&self) -> Rank {
        self.parts.rank
    }

    /// Always clean for a constructed digraph.
    pub fn validate(&self) -> ValidationReport {
        validate(&self.parts)
    }

    /// Number of finite ditip ranks declared.
    pub fn finite_depth(&self) -> u32 {
        self.parts.levels.len() as u32
    }

    pub fn arcs(&self) -> &[String] {
        &self.parts.arcs
    }

    pub fn has_arc(&self, arc: &str) -> bool {
        self.arc_set.contains(arc)
    }

    pub fn arc_ends(&self) -> impl Iterator<Item = ArcEnd> + '_ {
        self.parts.arcs.iter().flat_map(|a| {
            [
                ArcEnd::new(a.clone(), Side::Source),
                ArcEnd::new(a.clone(), Side::Sink),
            ]
        })
    }

    pub fn v0(&self) -> &[Block<ArcEnd>] {
        &self.parts.v0
    }

    /// Index of the 0-vertex holding `end`.
    pub fn vertex_of_end(&self, end: &ArcEnd) -> Option<usize> {
        self.end_vertex.get(end).copied()
    }

    pub fn level(&self, rank: Rank) -> Option<&TipLevel> {
        match rank {
            Rank::Finite(k) => self.parts.levels.get(k as usize),
            Rank::ArrowOmega => self.parts.arrow.as_ref(),
            Rank::Omega => None,
        }
    }

    fn level_index(&self, rank: Rank) -> Option<&LevelIndex> {
        match rank {
            Rank::Finite(k) => self.levels.get(k as usize),
            Rank::ArrowOmega => self.arrow.as_ref(),
            Rank::Omega => None,
        }
    }

    /// The declared ditip set of the given rank.
    pub fn ditips_of(&self, rank: Rank) -> Result<Vec<Ditip>, DigraphError> {
        let level = self.level(rank).ok_or(DigraphError::NoSuchLevel(rank))?;
        Ok(level
            .tips
            .iter()
            .map(|(id, polarity)| Ditip {
                id: id.clone(),
                rank,
                polarity: *polarity,
            })
            .collect())
    }

    pub fn polarity(&self, rank: Rank, id: &str) -> Option<Polarity> {
        self.level_index(rank)?.polarity.get(id).copied()
    }

    /// Index of the next-rank vertex holding ditip `id`.
    pub fn vertex_of_tip(&self, rank: Rank, id: &str) -> Option<usize> {
        self.level_index(rank)?.vertex.get(id).copied()
    }

    /// Whether two ditips of one rank lie in the same next-rank vertex.
    pub fn shorted(&self, rank: Rank, e: &str, f: &str) -> Result<bool, DigraphError> {
        let index = self
            .level_index(rank)
            .ok_or(DigraphError::NoSuchLevel(rank))?;
        let lookup = |id: &str| {
            index
                .vertex
                .get(id)
                .copied()
                .ok_or_else(|| DigraphError::UnknownDitip {
                    rank,
                    id: id.to_string(),
                })
        };
        Ok(lookup(e)? == lookup(f)?)
    }

    pub fn shorted_tips(&self, e: &Ditip, f: &Ditip) -> Result<bool, DigraphError> {
        if e.rank != f.rank {
            return Err(DigraphError::RankMismatch(e.rank, f.rank));
        }
        self.shorted(e.rank, &e.id, &f.id)
    }

    /// The truncation holding arcs and vertex sets up to `rank`.
    pub fn slice(&self, rank: Rank) -> Result<RankedDigraph, DigraphError> {
        let too_high = || DigraphError::RankTooHigh {
            requested: rank,
            available: self.rank(),
        };
        let mut parts = self.parts.clone();
        parts.rank = rank;
        match (rank, self.rank()) {
            (r, own) if r == own => return Ok(self.clone()),
            (Rank::Finite(k), _) => {
                if k > self.finite_depth() {
                    return Err(too_high());
                }
                parts.levels.truncate(k as usize);
                parts.arrow = None;
            }
            (Rank::ArrowOmega, Rank::Omega) => parts.arrow = None,
            _ => return Err(too_high()),
        }
        RankedDigraph::new(parts)
    }
}
