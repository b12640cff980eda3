//! The `check` suites: shorting independence under perturbation, and the
//! partition property of a build.

use nsdigraph::family::window;
use nsdigraph::{
    seq_valid, ElementKind, EpSequence, EpSet, NsClass, NsDigraph, NsVertex, RankedDigraph,
    RankedStructure, Ultrapower,
};

#[derive(Default)]
pub struct Tally {
    pub passed: usize,
    pub failed: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(what());
        }
    }
}

/// Small sets the oracle rejects: residue classes of small moduli and
/// initial segments.
fn rejected_regions(up: &Ultrapower<RankedDigraph>) -> Vec<EpSet> {
    let mut candidates = Vec::new();
    for m in 2..=4 {
        for r in 0..m {
            candidates.push(EpSet::residue_class(r, m).expect("positive modulus"));
        }
    }
    for k in 1..=4 {
        candidates.push(EpSet::finite(0..k));
    }
    candidates
        .into_iter()
        .filter(|s| !up.oracle().decide(s))
        .collect()
}

/// `s` rewritten on `region`, cycling through the elements present there.
fn perturb(
    up: &Ultrapower<RankedDigraph>,
    s: &EpSequence,
    region: &EpSet,
    shift: usize,
) -> EpSequence {
    let family = up.family();
    let (t, p) = window(family, &[s]);
    let threshold = t.max(region.threshold());
    let period = num_integer::lcm(p, region.period());
    EpSequence::from_fn(s.kind(), threshold, period, |n| {
        if region.contains(n) {
            let elems = family.at(n).elements(s.kind());
            (!elems.is_empty()).then(|| elems[(n as usize + shift) % elems.len()].clone())
        } else {
            s.at(n).cloned()
        }
    })
    .expect("values come from the sequence or the member")
}

pub fn independence(
    up: &Ultrapower<RankedDigraph>,
    sequences: &[EpSequence],
) -> Result<Tally, nsdigraph::ultrapower::UltrapowerError> {
    let mut tally = Tally::default();
    let regions = rejected_regions(up);
    let valid: Vec<&EpSequence> = sequences
        .iter()
        .filter(|s| s.kind() != ElementKind::Arc && seq_valid(s, up.family(), up.oracle()))
        .collect();
    for (i, s) in valid.iter().enumerate() {
        for t in valid.iter().filter(|t| t.kind() == s.kind()) {
            for (k, region) in regions.iter().enumerate() {
                let s_alt = perturb(up, s, region, i + k);
                let t_alt = perturb(up, t, &regions[(k + 1) % regions.len()], k);
                let ok = up.check_independence(s, &s_alt, t, &t_alt)?;
                tally.record(ok, || format!("{s} / {t} perturbed on {region}"));
            }
        }
    }
    Ok(tally)
}

fn partition_ok(
    up: &Ultrapower<RankedDigraph>,
    classes: &[NsClass],
    vertices: &[NsVertex],
) -> Result<bool, nsdigraph::ultrapower::UltrapowerError> {
    let mut owner = vec![None; classes.len()];
    for (v, vertex) in vertices.iter().enumerate() {
        for &m in &vertex.members {
            if owner[m].replace(v).is_some() {
                return Ok(false);
            }
        }
    }
    if owner.iter().any(Option::is_none) || vertices.iter().any(|v| v.members.is_empty()) {
        return Ok(false);
    }
    for (i, a) in classes.iter().enumerate() {
        for (j, b) in classes.iter().enumerate() {
            if up.ns_shorted(&a.rep, &b.rep)? != (owner[i] == owner[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn partition(
    up: &Ultrapower<RankedDigraph>,
    ns: &NsDigraph,
) -> Result<Tally, nsdigraph::ultrapower::UltrapowerError> {
    let mut tally = Tally::default();
    tally.record(partition_ok(up, &ns.ends, &ns.v0)?, || {
        "V0 over arc ends".into()
    });
    for level in ns.all_levels() {
        let ok = partition_ok(up, &level.tips, &level.vertices)?;
        tally.record(ok, || {
            format!("vertices over rank {} ditips", level.tip_rank)
        });
    }
    Ok(tally)
}
