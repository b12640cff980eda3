mod common;

use std::collections::BTreeMap;

use common::*;
use nsdigraph::family::{predicate_set, window};
use nsdigraph::format::{parse_spec, print_spec, SpecFile};
use nsdigraph::{
    ArcEnd, Block, ElementKind, EpSet, Multiples, OracleKind, Principal, Rank, RankedDigraph,
    RankedStructure, Side, Ultrafilter, Ultrapower,
};
use proptest::prelude::*;
use rand::Rng;

fn raw_epset() -> impl Strategy<Value = (Vec<u64>, u64, u64, Vec<u64>)> {
    (0u64..10, 1u64..13).prop_flat_map(|(threshold, period)| {
        (
            proptest::sample::subsequence(
                (0..threshold).collect::<Vec<_>>(),
                0..=threshold as usize,
            ),
            Just(threshold),
            Just(period),
            proptest::sample::subsequence((0..period).collect::<Vec<_>>(), 0..=period as usize),
        )
    })
}

fn epset() -> impl Strategy<Value = EpSet> {
    raw_epset().prop_map(|(p, t, m, r)| EpSet::new(p, t, m, r).unwrap())
}

const HORIZON: u64 = 200;

fn bitmap(s: &EpSet) -> Vec<bool> {
    (0..HORIZON).map(|n| s.contains(n)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn membership_matches_definition((prefix, threshold, period, residues) in raw_epset()) {
        let s = EpSet::new(prefix.clone(), threshold, period, residues.clone()).unwrap();
        for n in 0..HORIZON {
            let want = if n < threshold { prefix.contains(&n) } else { residues.contains(&(n % period)) };
            prop_assert_eq!(s.contains(n), want, "n = {}", n);
        }
    }

    #[test]
    fn normalize_is_canonical(s in epset()) {
        let again = s.normalize();
        prop_assert_eq!(again.threshold(), s.threshold());
        prop_assert_eq!(again.period(), s.period());
        // No smaller period, and the threshold cannot move down.
        let (t, p) = (s.threshold(), s.period());
        for d in 1..p {
            prop_assert!((t..t + p).any(|n| s.contains(n) != s.contains(n + d)));
        }
        prop_assert!(t == 0 || s.contains(t - 1) != s.contains(t - 1 + p));
    }

    #[test]
    fn boolean_algebra(a in epset(), b in epset(), c in epset()) {
        let (ba, bb, bc) = (bitmap(&a), bitmap(&b), bitmap(&c));
        let pointwise = |s: &EpSet, f: &dyn Fn(usize) -> bool| (0..HORIZON as usize).all(|i| s.contains(i as u64) == f(i));
        prop_assert!(pointwise(&a.intersect(&b), &|i| ba[i] && bb[i]));
        prop_assert!(pointwise(&a.union(&b), &|i| ba[i] || bb[i]));
        prop_assert!(pointwise(&a.difference(&b), &|i| ba[i] && !bb[i]));
        prop_assert!(pointwise(&a.complement(), &|i| !ba[i]));
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert_eq!(a.union(&b).complement(), a.complement().intersect(&b.complement()));
        prop_assert_eq!(a.intersect(&b.union(&c)), a.intersect(&b).union(&a.intersect(&c)));
        prop_assert!(pointwise(&a.intersect(&b).intersect(&c), &|i| ba[i] && bb[i] && bc[i]));
        prop_assert_eq!(a.is_subset(&b), (0..HORIZON as usize).all(|i| !ba[i] || bb[i]));
    }

    #[test]
    fn equality_is_extensional(a in epset(), b in epset()) {
        prop_assert_eq!(a == b, bitmap(&a) == bitmap(&b));
    }

    #[test]
    fn display_round_trips(s in epset()) {
        let parsed: EpSet = s.to_string().parse().unwrap();
        prop_assert_eq!(parsed, s);
    }

    #[test]
    fn principal_is_membership(s in epset(), n0 in 0u64..30) {
        prop_assert_eq!(Principal(n0).decide(&s), s.contains(n0));
    }

    #[test]
    fn multiples_contains_large_multiples(s in epset()) {
        let big = 1000 * s.period() * 12;
        prop_assert_eq!(Multiples.decide(&s), s.contains(big));
    }

    #[test]
    fn oracles_respect_laws(a in epset(), b in epset(), seed in any::<u64>()) {
        for oracle in [OracleKind::Multiples.instantiate(), OracleKind::LazyFip(seed).instantiate()] {
            let (da, db) = (oracle.decide(&a), oracle.decide(&b));
            prop_assert_ne!(da, oracle.decide(&a.complement()));
            prop_assert_eq!(oracle.decide(&a.intersect(&b)), da && db);
            prop_assert_eq!(oracle.decide(&a.union(&b)), da || db);
            if a.is_finite() {
                prop_assert!(!da);
            }
        }
    }

    #[test]
    fn lazyfip_is_reproducible(sets in proptest::collection::vec(epset(), 1..20), seed in any::<u64>()) {
        let (x, y) = (OracleKind::LazyFip(seed).instantiate(), OracleKind::LazyFip(seed).instantiate());
        for s in &sets {
            prop_assert_eq!(x.decide(s), y.decide(s));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standard_shorting_is_equivalence(seed in any::<u64>(), rank in 1u32..4) {
        let d = random_digraph(&mut rng(seed), rank);
        for k in 0..rank {
            let r = Rank::Finite(k);
            let ids: Vec<String> = d.level(r).unwrap().tips.iter().map(|(t, _)| t.clone()).collect();
            for a in &ids {
                prop_assert!(d.shorted(r, a, a).unwrap());
                for b in &ids {
                    prop_assert_eq!(d.shorted(r, a, b).unwrap(), d.shorted(r, b, a).unwrap());
                    for c in &ids {
                        let chain = d.shorted(r, a, b).unwrap() && d.shorted(r, b, c).unwrap();
                        prop_assert!(!chain || d.shorted(r, a, c).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn validation_rejects_mutations(seed in any::<u64>(), rank in 1u32..4, which in 0usize..5) {
        let mut r = rng(seed);
        let d = random_digraph(&mut r, rank);
        let mut parts = d.into_parts();
        let level = r.gen_range(0..rank) as usize;
        match which {
            0 => {
                let end = parts.v0[0].members.pop().unwrap();
                parts.v0[0].members.push(ArcEnd::new(end.arc.clone() + "_ghost", Side::Source));
            }
            1 => {
                let t = parts.levels[level].vertices[0].members[0].clone();
                parts.levels[level].vertices.push(Block::new("dup", [t]));
            }
            2 => parts.levels[level].vertices.push(Block::new("hollow", Vec::<String>::new())),
            3 => {
                let v = &mut parts.levels[level].vertices[0];
                v.members.push("nowhere".into());
            }
            _ => {
                parts.levels[level].tips.clear();
                parts.levels[level].vertices.clear();
            }
        }
        prop_assert!(!parts.validate().is_clean());
        prop_assert!(RankedDigraph::new(parts).is_err());
    }

    #[test]
    fn predicate_set_matches_pointwise(seed in any::<u64>(), rank in 1u32..4) {
        let mut r = rng(seed);
        let family = random_family(&mut r, rank);
        let kind = ElementKind::Tip(Rank::Finite(r.gen_range(0..rank)));
        let s = random_sequence(&mut r, &family, kind);
        let t = random_sequence(&mut r, &family, kind);
        let pred = |d: &RankedDigraph, v: &[Option<&nsdigraph::Element>]| match (v[0], v[1]) {
            (Some(a), Some(b)) => d.vertex_of(kind, a).is_some() && d.vertex_of(kind, a) == d.vertex_of(kind, b),
            _ => false,
        };
        let set = predicate_set::<_, std::convert::Infallible>(&family, &[&s, &t], |_, d, v| Ok(pred(d, v))).unwrap();
        let (thr, per) = window(&family, &[&s, &t]);
        for n in 0..(thr + 4 * per).max(60) {
            prop_assert_eq!(set.contains(n), pred(family.at(n), &[s.at(n), t.at(n)]), "n = {}", n);
        }
        let up = Ultrapower::new(&family, &Multiples);
        prop_assert_eq!(up.shorting_set(&s, &t), set);
    }

    #[test]
    fn family_is_eventually_periodic(seed in any::<u64>(), rank in 0u32..4) {
        let family = random_family(&mut rng(seed), rank);
        let (n0, p) = (family.threshold(), family.period());
        for n in n0..n0 + 3 * p {
            prop_assert_eq!(family.name_at(n), family.name_at(n + p));
            prop_assert!(family.at(n).rank() == family.rank());
        }
        for n in 0..n0 {
            prop_assert!(family.at(n).rank() <= family.rank());
        }
        let lower = (0..n0).filter(|&n| family.at(n).rank() != family.rank()).count();
        prop_assert_eq!(family.warnings().len(), lower);
    }

    #[test]
    fn spec_files_round_trip(seed in any::<u64>(), rank in 0u32..4) {
        let mut r = rng(seed);
        let family = random_family(&mut r, rank);
        let mut sequences = BTreeMap::new();
        sequences.insert("e".to_string(), random_sequence(&mut r, &family, ElementKind::End));
        sequences.insert("a".to_string(), random_sequence(&mut r, &family, ElementKind::Arc));
        if rank > 0 {
            sequences.insert("t".to_string(), random_sequence(&mut r, &family, ElementKind::Tip(Rank::Finite(0))));
        }
        let mut sets = BTreeMap::new();
        sets.insert("s".to_string(), random_epset(&mut r, 12, 8));
        let spec = SpecFile { family, sequences, sets };
        let text = print_spec(&spec);
        let parsed = parse_spec(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&parsed, &spec);
        prop_assert_eq!(print_spec(&parsed), text);
    }

    #[test]
    fn enumeration_is_free_of_duplicates(seed in any::<u64>(), rank in 0u32..4) {
        let mut r = rng(seed);
        let family = random_family(&mut r, rank);
        for (_, oracle) in all_oracles() {
            let up = Ultrapower::new(&family, oracle.as_ref());
            let ns = up.build(family.rank(), family.period()).unwrap();
            for kind in build_kinds(&ns) {
                let classes = up.enumerate(kind, family.period()).unwrap();
                for (i, a) in classes.iter().enumerate() {
                    prop_assert!(nsdigraph::seq_valid(&a.rep, &family, oracle.as_ref()));
                    for b in &classes[i + 1..] {
                        prop_assert!(!up.ns_equal(&a.rep, &b.rep).unwrap());
                        prop_assert!(a.rep.order_key() < b.rep.order_key());
                    }
                }
                // Any random valid sequence lands in some enumerated class.
                if let Some(s) = random_valid_sequence(&mut r, &family, kind, oracle.as_ref()) {
                    let hits = classes.iter().filter(|c| up.ns_equal(&c.rep, &s).unwrap()).count();
                    prop_assert!(hits <= 1);
                }
            }
        }
    }
}

#[test]
fn corpus_meets_requirements() {
    let corpus = corpus();
    assert!(corpus.len() >= 10);
    for (name, family) in &corpus {
        assert!(family.period() <= 4, "{name}");
        for m in family.members().values() {
            assert!(m.elements(ElementKind::Arc).len() <= 12, "{name}");
        }
    }
    let finite: std::collections::BTreeSet<Rank> = corpus.iter().map(|(_, f)| f.rank()).collect();
    for k in 0..4 {
        assert!(finite.contains(&Rank::Finite(k)));
    }
}
