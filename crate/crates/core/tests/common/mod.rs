//! Shared generators and structural checkers for the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nsdigraph::family::window;
use nsdigraph::format::{parse_spec, SpecFile};
use nsdigraph::{
    ArcEnd, Block, DigraphParts, Element, ElementKind, EpSequence, EpSet, Family, FamilySpec,
    NsDigraph, NsLevel, NsVertex, Polarity, Rank, RankedDigraph, RankedStructure, Side, TipLevel,
    Ultrafilter, Ultrapower,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

pub fn load_fixture(name: &str) -> SpecFile {
    let text = std::fs::read_to_string(fixture_dir().join(name)).expect("fixture exists");
    parse_spec(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Hand-written fixtures plus seeded random families: 13 families of
/// finite rank 0–3 (cycle length ≤ 4, ≤ 12 arcs) and two omega families.
pub fn corpus() -> Vec<(String, FamilySpec)> {
    let mut out = Vec::new();
    let mut files: Vec<_> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".fam"))
        .collect();
    files.sort();
    for f in files {
        out.push((f.clone(), load_fixture(&f).family));
    }
    let mut r = rng(0xC0FFEE);
    for i in 0..9 {
        let rank = (i % 4) as u32;
        out.push((
            format!("random-{i}-rank{rank}"),
            random_family(&mut r, rank),
        ));
    }
    out
}

fn random_partition<T: Clone>(r: &mut TestRng, items: &[T], prefix: &str) -> Vec<Block<T>> {
    let blocks = r.gen_range(1..=items.len());
    let mut buckets: Vec<Vec<T>> = vec![Vec::new(); blocks];
    for item in items {
        buckets[r.gen_range(0..blocks)].push(item.clone());
    }
    buckets
        .into_iter()
        .filter(|b| !b.is_empty())
        .enumerate()
        .map(|(i, b)| Block::new(format!("{prefix}{i}"), b))
        .collect()
}

fn nonempty_subset(r: &mut TestRng, pool: &[String], max: usize) -> Vec<String> {
    let mut chosen: Vec<String> = pool
        .iter()
        .filter(|_| r.gen_bool(0.6))
        .take(max)
        .cloned()
        .collect();
    if chosen.is_empty() {
        chosen.push(pool.choose(r).unwrap().clone());
    }
    chosen
}

/// A random digraph of finite rank drawing ids from shared pools, so that
/// members of one family have elements in common.
pub fn random_digraph(r: &mut TestRng, rank: u32) -> RankedDigraph {
    let arc_pool: Vec<String> = (0..12).map(|i| format!("a{i}")).collect();
    let mut parts = DigraphParts::new(Rank::Finite(rank));
    let n_arcs = r.gen_range(1..=6);
    parts.arcs = nonempty_subset(r, &arc_pool, n_arcs);
    let mut ends: Vec<ArcEnd> = parts
        .arcs
        .iter()
        .flat_map(|a| {
            [
                ArcEnd::new(a.clone(), Side::Source),
                ArcEnd::new(a.clone(), Side::Sink),
            ]
        })
        .collect();
    ends.shuffle(r);
    parts.v0 = random_partition(r, &ends, "x");
    for k in 0..rank {
        let pool: Vec<String> = (0..5).map(|i| format!("t{k}_{i}")).collect();
        let tips = nonempty_subset(r, &pool, 5);
        parts.levels.push(TipLevel {
            tips: tips
                .iter()
                .map(|t| {
                    let pol = if r.gen_bool(0.5) {
                        Polarity::Intip
                    } else {
                        Polarity::Outtip
                    };
                    (t.clone(), pol)
                })
                .collect(),
            vertices: random_partition(r, &tips, &format!("w{}_", k + 1)),
        });
    }
    RankedDigraph::new(parts).expect("generator builds valid digraphs")
}

pub fn random_family(r: &mut TestRng, rank: u32) -> FamilySpec {
    let cycle_len = r.gen_range(1..=4);
    let prefix_len = r.gen_range(0..=2);
    let mut members = BTreeMap::new();
    let mut cycle = Vec::new();
    let mut prefix = Vec::new();
    for i in 0..cycle_len {
        let name = format!("C{i}");
        members.insert(name.clone(), random_digraph(r, rank));
        cycle.push(name);
    }
    for i in 0..prefix_len {
        let name = format!("P{i}");
        // Occasionally a lower-rank prefix member.
        let member_rank = if rank > 0 && r.gen_bool(0.3) {
            rank - 1
        } else {
            rank
        };
        members.insert(name.clone(), random_digraph(r, member_rank));
        prefix.push(name);
    }
    Family::new(members, prefix, cycle, Rank::Finite(rank)).unwrap()
}

/// Ranks of ditips present in at least one cycle member.
pub fn tip_kinds<S: RankedStructure>(family: &Family<S>) -> Vec<ElementKind> {
    let mut kinds = Vec::new();
    for k in 0..family.finite_depth() {
        kinds.push(ElementKind::Tip(Rank::Finite(k)));
    }
    if family.rank() == Rank::Omega {
        kinds.push(ElementKind::Tip(Rank::ArrowOmega));
    }
    kinds
}

/// A random eventually periodic sequence with its own alignment, naming
/// only elements that exist at each position. May be invalid.
pub fn random_sequence<S: RankedStructure>(
    r: &mut TestRng,
    family: &Family<S>,
    kind: ElementKind,
) -> EpSequence {
    let n0 = family.threshold();
    let p = family.period();
    let threshold = r.gen_range(0..=n0 + 2);
    let period = r.gen_range(1..=6u64);
    let prefix = (0..threshold)
        .map(|n| {
            let elems = family.at(n).elements(kind);
            if elems.is_empty() || r.gen_bool(0.1) {
                None
            } else {
                elems.choose(r).cloned()
            }
        })
        .collect();
    let cycle = (0..period)
        .map(|j| {
            // Positions threshold + j + i·period, for enough i to cover every
            // member the residue can meet.
            let mut common: Option<BTreeSet<Element>> = None;
            for i in 0..(p * (n0 + 1) + 2) {
                let n = threshold + j + i * period;
                let here: BTreeSet<Element> = family.at(n).elements(kind).into_iter().collect();
                common = Some(match common {
                    None => here,
                    Some(c) => c.intersection(&here).cloned().collect(),
                });
            }
            let common: Vec<Element> = common.unwrap().into_iter().collect();
            if common.is_empty() || r.gen_bool(0.05) {
                None
            } else {
                common.choose(r).cloned()
            }
        })
        .collect();
    let s = EpSequence::new(kind, prefix, cycle).unwrap();
    s.check_against(family)
        .expect("generator names existing elements");
    s
}

pub fn random_valid_sequence<S: RankedStructure>(
    r: &mut TestRng,
    family: &Family<S>,
    kind: ElementKind,
    oracle: &dyn Ultrafilter,
) -> Option<EpSequence> {
    (0..50)
        .map(|_| random_sequence(r, family, kind))
        .find(|s| nsdigraph::seq_valid(s, family, oracle))
}

pub fn random_epset(r: &mut TestRng, max_period: u64, max_threshold: u64) -> EpSet {
    let period = r.gen_range(1..=max_period);
    let threshold = r.gen_range(0..=max_threshold);
    let density = r.gen_range(0.0..=1.0);
    let residues: Vec<u64> = (0..period).filter(|_| r.gen_bool(density)).collect();
    let prefix: Vec<u64> = (0..threshold).filter(|_| r.gen_bool(0.5)).collect();
    EpSet::new(prefix, threshold, period, residues).unwrap()
}

/// A random set the oracle rejects.
pub fn rejected_set(r: &mut TestRng, oracle: &dyn Ultrafilter) -> EpSet {
    loop {
        let s = random_epset(r, 6, 4);
        if !oracle.decide(&s) {
            return s;
        }
        let c = s.complement();
        if !oracle.decide(&c) {
            return c;
        }
    }
}

/// `s` with its values replaced on the positions of `region` by random
/// elements (or absences).
pub fn perturb<S: RankedStructure>(
    r: &mut TestRng,
    family: &Family<S>,
    s: &EpSequence,
    region: &EpSet,
) -> EpSequence {
    let (t, p) = window(family, &[s]);
    let threshold = t.max(region.threshold());
    let period = num_integer::lcm(p, region.period());
    EpSequence::from_fn(s.kind(), threshold, period, |n| {
        if region.contains(n) {
            let elems = family.at(n).elements(s.kind());
            if elems.is_empty() || r.gen_bool(0.1) {
                None
            } else {
                elems.choose(r).cloned()
            }
        } else {
            s.at(n).cloned()
        }
    })
    .unwrap()
}

pub fn all_oracles() -> Vec<(String, Box<dyn Ultrafilter>)> {
    use nsdigraph::OracleKind;
    [
        OracleKind::Multiples,
        OracleKind::LazyFip(11),
        OracleKind::Principal(3),
    ]
    .into_iter()
    .map(|k| (k.to_string(), k.instantiate()))
    .collect()
}

pub fn nonprincipal_oracles() -> Vec<(String, Box<dyn Ultrafilter>)> {
    use nsdigraph::OracleKind;
    [OracleKind::Multiples, OracleKind::LazyFip(11)]
        .into_iter()
        .map(|k| (k.to_string(), k.instantiate()))
        .collect()
}

/// Checks that `vertices` partition `0..n_classes` and that membership
/// agrees with pairwise shorting. Returns a description of the first
/// failure.
pub fn check_partition<S: RankedStructure>(
    up: &Ultrapower<S>,
    classes: &[nsdigraph::NsClass],
    vertices: &[NsVertex],
) -> Result<(), String> {
    let mut owner = vec![None; classes.len()];
    for (v, vertex) in vertices.iter().enumerate() {
        if vertex.members.is_empty() {
            return Err(format!("vertex {} is empty", vertex.label));
        }
        for &m in &vertex.members {
            if m >= classes.len() {
                return Err(format!("vertex {} lists unknown class {m}", vertex.label));
            }
            if let Some(prev) = owner[m].replace(v) {
                return Err(format!("class {m} in vertices {prev} and {v}"));
            }
        }
    }
    if let Some(m) = owner.iter().position(Option::is_none) {
        return Err(format!("class {} in no vertex", classes[m].label));
    }
    for i in 0..classes.len() {
        for j in 0..classes.len() {
            let shorted = up
                .ns_shorted(&classes[i].rep, &classes[j].rep)
                .map_err(|e| e.to_string())?;
            if shorted != (owner[i] == owner[j]) {
                return Err(format!(
                    "{} and {}: shorted = {shorted} but same vertex = {}",
                    classes[i].label,
                    classes[j].label,
                    owner[i] == owner[j]
                ));
            }
        }
    }
    Ok(())
}

pub fn check_ns_partitions<S: RankedStructure>(
    up: &Ultrapower<S>,
    ns: &NsDigraph,
) -> Result<(), String> {
    check_partition(up, &ns.ends, &ns.v0).map_err(|e| format!("V0: {e}"))?;
    for level in ns.all_levels() {
        check_partition(up, &level.tips, &level.vertices)
            .map_err(|e| format!("rank {}: {e}", level.tip_rank))?;
    }
    Ok(())
}

fn blocks_at(
    classes: &[nsdigraph::NsClass],
    vertices: &[NsVertex],
    n0: u64,
) -> BTreeSet<BTreeSet<Element>> {
    vertices
        .iter()
        .map(|v| {
            v.members
                .iter()
                .map(|&m| classes[m].rep.at(n0).cloned().expect("present at n0"))
                .collect()
        })
        .collect()
}

fn values_at(classes: &[nsdigraph::NsClass], n0: u64) -> Result<Vec<Element>, String> {
    classes
        .iter()
        .map(|c| {
            c.rep
                .at(n0)
                .cloned()
                .ok_or_else(|| format!("{} absent at n0", c.label))
        })
        .collect()
}

fn same_elements(got: &[Element], want: Vec<Element>, what: &str) -> Result<(), String> {
    let got_set: BTreeSet<&Element> = got.iter().collect();
    let want_set: BTreeSet<&Element> = want.iter().collect();
    if got_set.len() != got.len() {
        return Err(format!("{what}: evaluation at n0 is not injective"));
    }
    if got_set != want_set {
        return Err(format!("{what}: {got_set:?} vs {want_set:?}"));
    }
    Ok(())
}

/// Verifies that evaluating every representative at `n0` is an isomorphism
/// from `ns` onto `member`.
pub fn check_isomorphic_at<S: RankedStructure>(
    ns: &NsDigraph,
    member: &S,
    n0: u64,
) -> Result<(), String> {
    let arcs = values_at(&ns.arcs, n0)?;
    same_elements(&arcs, member.elements(ElementKind::Arc), "arcs")?;
    let ends = values_at(&ns.ends, n0)?;
    same_elements(&ends, member.elements(ElementKind::End), "arc ends")?;
    for (i, &(arc, side)) in ns.end_arcs.iter().enumerate() {
        let Element::End(e) = &ends[i] else {
            unreachable!()
        };
        if Element::Arc(e.arc.clone()) != arcs[arc] || e.side != side {
            return Err(format!("incidence of {}", ns.ends[i].label));
        }
    }
    let partition = |kind| {
        member
            .partition(kind)
            .into_iter()
            .map(|b| b.into_iter().collect())
            .collect::<BTreeSet<BTreeSet<Element>>>()
    };
    if blocks_at(&ns.ends, &ns.v0, n0) != partition(ElementKind::End) {
        return Err("V0 partition differs".into());
    }
    let check_level = |level: &NsLevel| -> Result<(), String> {
        let kind = ElementKind::Tip(level.tip_rank);
        let tips = values_at(&level.tips, n0)?;
        same_elements(
            &tips,
            member.elements(kind),
            &format!("rank {} ditips", level.tip_rank),
        )?;
        for (c, t) in level.tips.iter().zip(&tips) {
            if c.polarity != member.polarity(kind, t) {
                return Err(format!("polarity of {}", c.label));
            }
        }
        if blocks_at(&level.tips, &level.vertices, n0) != partition(kind) {
            return Err(format!("partition above rank {} differs", level.tip_rank));
        }
        Ok(())
    };
    for level in ns.all_levels() {
        check_level(level)?;
    }
    if ns.levels.len() < member.finite_depth() as usize && ns.rank >= member.rank() {
        return Err("build has fewer finite levels than the member".into());
    }
    Ok(())
}

/// Every class at `coarse` equals exactly one class at `fine`, and distinct
/// coarse classes land on distinct fine classes.
pub fn check_refinement<S: RankedStructure>(
    up: &Ultrapower<S>,
    coarse: &[nsdigraph::NsClass],
    fine: &[nsdigraph::NsClass],
) -> Result<(), String> {
    let mut images = BTreeSet::new();
    for c in coarse {
        let hits: Vec<usize> = fine
            .iter()
            .enumerate()
            .filter(|(_, f)| up.ns_equal(&c.rep, &f.rep).unwrap())
            .map(|(i, _)| i)
            .collect();
        if hits.len() != 1 {
            return Err(format!("{} matches {} finer classes", c.label, hits.len()));
        }
        if !images.insert(hits[0]) {
            return Err(format!("{} collides with another class", c.label));
        }
    }
    Ok(())
}

/// Every kind an ultrapower build materializes.
pub fn build_kinds(ns: &NsDigraph) -> Vec<ElementKind> {
    let mut kinds = vec![ElementKind::Arc, ElementKind::End];
    kinds.extend(ns.all_levels().map(|l| ElementKind::Tip(l.tip_rank)));
    kinds
}
