//! Nonstandard transfinite digraphs by ultrapower.
//!
//! Start from an eventually periodic family `⟨D_n⟩` of ranked digraphs and
//! an ultrafilter oracle; the crate decides equality, polarity and shorting
//! of nonstandard elements exactly, and materializes the nonstandard
//! digraph `*D^μ` for finite ranks, the arrow rank and `ω`, together with
//! its underlying nonstandard graph.
//!
//! Representatives are restricted to eventually periodic sequences so that
//! every index set involved is an [`EpSet`] and every ultrafilter query is
//! decidable. The structures produced are the part of the full ultrapower
//! reachable from such sequences.
//!
//! ```
//! use nsdigraph::{format, Multiples, Rank, Ultrapower};
//!
//! let text = "
//!     digraph D rank 1 {
//!       arcs a;
//!       v0 x = {a.src, a.snk};
//!       ditips0 t1:in, t2:out;
//!       v1 w = {t1, t2};
//!     }
//!     family rank 1 { prefix []; cycle [D]; }
//! ";
//! let spec = format::parse_spec(text).unwrap();
//! let ns = Ultrapower::new(&spec.family, &Multiples)
//!     .build(Rank::Finite(1), 1)
//!     .unwrap();
//! assert_eq!(ns.levels[0].tips.len(), 2);
//! assert_eq!(ns.levels[0].vertices.len(), 1);
//! ```

pub mod digraph;
pub mod dot;
pub mod epset;
pub mod family;
pub mod format;
pub mod structure;
pub mod ultrafilter;
pub mod ultrapower;
pub mod underlying;

pub use digraph::{
    ArcEnd, Block, DigraphParts, Ditip, Element, ElementKind, Polarity, Rank, RankedDigraph, Side,
    TipLevel, ValidationReport, Violation,
};
pub use epset::{Classification, EpSet};
pub use family::{predicate_set, seq_valid, EpSequence, Family, FamilySpec};
pub use structure::RankedStructure;
pub use ultrafilter::{LazyFip, Multiples, OracleKind, Principal, Ultrafilter};
pub use ultrapower::{standard_embedding, NsClass, NsDigraph, NsLevel, NsVertex, Slot, Ultrapower};
pub use underlying::{forget, forget_ns, RankedGraph};
