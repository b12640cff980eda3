//! Ultrafilter oracles on the algebra of eventually periodic sets.
//!
//! A nonprincipal ultrafilter on all of 2^ℕ cannot be written down, but its
//! trace on [`EpSet`]s can: every construction in this crate only ever asks
//! whether some eventually periodic index set is "large", and the oracles
//! here answer that question consistently with the ultrafilter laws.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::epset::EpSet;

/// Membership oracle for a fixed ultrafilter.
///
/// Implementations must satisfy, on every query within one session:
/// the empty set is rejected and the full set accepted; exactly one of a set
/// and its complement is accepted; accepted sets are closed under
/// intersection and supersets.
pub trait Ultrafilter: Send + Sync {
    fn decide(&self, set: &EpSet) -> bool;

    /// Whether every finite set is rejected.
    fn is_nonprincipal(&self) -> bool;

    /// Stable identifier, used in output provenance.
    fn describe(&self) -> String;
}

/// The principal ultrafilter generated by `{n0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Principal(pub u64);

impl Ultrafilter for Principal {
    fn decide(&self, set: &EpSet) -> bool {
        set.contains(self.0)
    }

    fn is_nonprincipal(&self) -> bool {
        false
    }

    fn describe(&self) -> String {
        format!("principal:{}", self.0)
    }
}

/// Accepts `S` iff, for some `m ≥ 1`, all sufficiently large multiples of
/// `m` lie in `S`.
///
/// On eventually periodic sets this is the same as asking whether residue
/// `0` of the periodic pattern is a member, which makes it a genuine
/// nonprincipal ultrafilter on the algebra.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Multiples;

impl Ultrafilter for Multiples {
    fn decide(&self, set: &EpSet) -> bool {
        set.residues().next() == Some(0)
    }

    fn is_nonprincipal(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        "multiples".into()
    }
}

/// An ultrafilter grown one query at a time.
///
/// The oracle keeps the intersection of every set it has accepted so far
/// (the committed core, always infinite). A query is forced when the core
/// already lies inside the set or meets it only finitely; otherwise a
/// seeded coin decides whether the set or its complement joins the core.
/// Answers are stable for the lifetime of the value; different seeds give
/// different ultrafilters.
///
/// Only infinitude affects the answers, so the core is kept modulo
/// finite sets, as a purely periodic pattern.
#[derive(Debug)]
pub struct LazyFip {
    seed: u64,
    state: Mutex<LazyState>,
}

#[derive(Debug)]
struct LazyState {
    /// Residues of the core modulo its period.
    core: Vec<bool>,
    /// The core reduced modulo divisors of its period.
    reduced: HashMap<usize, Vec<bool>>,
    rng: ChaCha8Rng,
    commitments: usize,
}

impl LazyState {
    fn reduced(&mut self, g: usize) -> &[bool] {
        let core = &self.core;
        self.reduced.entry(g).or_insert_with(|| {
            let mut mask = vec![false; g];
            for (r, _) in core.iter().enumerate().filter(|(_, &b)| b) {
                mask[r % g] = true;
            }
            mask
        })
    }
}

impl LazyFip {
    pub fn new(seed: u64) -> Self {
        LazyFip {
            seed,
            state: Mutex::new(LazyState {
                core: vec![true],
                reduced: HashMap::new(),
                rng: ChaCha8Rng::seed_from_u64(seed),
                commitments: 0,
            }),
        }
    }

    /// Number of free choices made so far.
    pub fn commitments(&self) -> usize {
        self.state.lock().expect("lazy oracle poisoned").commitments
    }

    /// The intersection of every set accepted so far, up to a finite set.
    pub fn core(&self) -> EpSet {
        let state = self.state.lock().expect("lazy oracle poisoned");
        let core = &state.core;
        EpSet::from_fn(0, core.len() as u64, |n| core[n as usize % core.len()])
    }
}

impl Ultrafilter for LazyFip {
    fn decide(&self, set: &EpSet) -> bool {
        let mut state = self.state.lock().expect("lazy oracle poisoned");
        let q = set.period() as usize;
        let mut pattern = vec![false; q];
        for r in set.residues() {
            pattern[r as usize] = true;
        }
        // n ≡ a (mod P) and n ≡ b (mod q) are compatible iff a ≡ b mod gcd.
        let period = state.core.len();
        let g = period.gcd(&q);
        let mask = state.reduced(g);
        let meets = |want: bool| (0..q).any(|b| pattern[b] == want && mask[b % g]);
        if !meets(true) {
            return false;
        }
        if !meets(false) {
            return true;
        }
        let accept = state.rng.gen_bool(0.5);
        let l = period.lcm(&q);
        state.core = (0..l)
            .map(|n| state.core[n % period] && pattern[n % q] == accept)
            .collect();
        state.reduced.clear();
        state.commitments += 1;
        accept
    }

    fn is_nonprincipal(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("lazyfip:{}", self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown oracle `{0}` (expected principal:<n0>, multiples or lazyfip:<seed>)")]
pub struct OracleParseError(String);

/// Oracle selector as written on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OracleKind {
    Principal(u64),
    #[default]
    Multiples,
    LazyFip(u64),
}

impl OracleKind {
    /// A fresh oracle session.
    pub fn instantiate(self) -> Box<dyn Ultrafilter> {
        match self {
            OracleKind::Principal(n0) => Box::new(Principal(n0)),
            OracleKind::Multiples => Box::new(Multiples),
            OracleKind::LazyFip(seed) => Box::new(LazyFip::new(seed)),
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleKind::Principal(n0) => write!(f, "principal:{n0}"),
            OracleKind::Multiples => f.write_str("multiples"),
            OracleKind::LazyFip(seed) => write!(f, "lazyfip:{seed}"),
        }
    }
}

impl FromStr for OracleKind {
    type Err = OracleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || OracleParseError(s.to_string());
        match s.split_once(':') {
            None if s == "multiples" => Ok(OracleKind::Multiples),
            Some(("principal", n)) => n.parse().map(OracleKind::Principal).map_err(|_| err()),
            Some(("lazyfip", n)) => n.parse().map(OracleKind::LazyFip).map_err(|_| err()),
            _ => Err(err()),
        }
    }
}
