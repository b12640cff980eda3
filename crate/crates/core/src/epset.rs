//! Eventually periodic subsets of ℕ.
//!
//! An [`EpSet`] is described by a finite prefix (the members below a
//! threshold `N₀`) and a periodic pattern indexed by `n mod p` that governs
//! every `n ≥ N₀`. Residues are absolute: `n` is a member in the periodic
//! regime iff `n mod p` is a listed residue. These sets form a Boolean
//! algebra in which membership, equality and inclusion are all decidable,
//! and every index set the ultrapower construction needs is one of them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EpSetError {
    #[error("period must be positive")]
    ZeroPeriod,
    #[error("residue {residue} is not below the period {period}")]
    ResidueOutOfRange { residue: u64, period: u64 },
    #[error("prefix member {member} is not below the threshold {threshold}")]
    PrefixOutOfRange { member: u64, threshold: u64 },
    #[error("malformed set notation at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// Coarse shape of an eventually periodic set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Finite,
    Cofinite,
    Neither,
}

/// An eventually periodic subset of the naturals.
///
/// Every constructor except [`EpSet::with_layout`] returns the canonical
/// form (minimal period, then minimal threshold). Equality compares
/// canonical forms, so two values are equal iff they have the same members.
#[derive(Debug, Clone)]
pub struct EpSet {
    threshold: u64,
    /// `pattern[r]` is membership of every `n ≥ threshold` with `n mod p = r`.
    pattern: Vec<bool>,
    /// Members strictly below `threshold`.
    prefix: BTreeSet<u64>,
}

impl EpSet {
    /// Builds a set from its four defining fields and normalizes it.
    pub fn new(
        prefix: impl IntoIterator<Item = u64>,
        threshold: u64,
        period: u64,
        residues: impl IntoIterator<Item = u64>,
    ) -> Result<Self, EpSetError> {
        Ok(Self::with_layout(prefix, threshold, period, residues)?.normalize())
    }

    /// Builds a set keeping the given threshold and period verbatim.
    pub fn with_layout(
        prefix: impl IntoIterator<Item = u64>,
        threshold: u64,
        period: u64,
        residues: impl IntoIterator<Item = u64>,
    ) -> Result<Self, EpSetError> {
        if period == 0 {
            return Err(EpSetError::ZeroPeriod);
        }
        let mut pattern = vec![false; period as usize];
        for residue in residues {
            if residue >= period {
                return Err(EpSetError::ResidueOutOfRange { residue, period });
            }
            pattern[residue as usize] = true;
        }
        let mut members = BTreeSet::new();
        for member in prefix {
            if member >= threshold {
                return Err(EpSetError::PrefixOutOfRange { member, threshold });
            }
            members.insert(member);
        }
        Ok(EpSet {
            threshold,
            pattern,
            prefix: members,
        })
    }

    pub fn empty() -> Self {
        EpSet {
            threshold: 0,
            pattern: vec![false],
            prefix: BTreeSet::new(),
        }
    }

    pub fn full() -> Self {
        EpSet {
            threshold: 0,
            pattern: vec![true],
            prefix: BTreeSet::new(),
        }
    }

    /// A finite set.
    pub fn finite(members: impl IntoIterator<Item = u64>) -> Self {
        let members: BTreeSet<u64> = members.into_iter().collect();
        let threshold = members.iter().next_back().map_or(0, |m| m + 1);
        EpSet {
            threshold,
            pattern: vec![false],
            prefix: members,
        }
        .normalize()
    }

    /// `{n : n ≡ residue (mod modulus)}`.
    pub fn residue_class(residue: u64, modulus: u64) -> Result<Self, EpSetError> {
        Self::new([], 0, modulus, [residue])
    }

    /// The set `{n : f(n)}` for a predicate known to be periodic with the
    /// given period from `threshold` on. `f` is evaluated on `0..threshold`
    /// and on one period past the threshold only.
    ///
    /// # Panics
    /// If `period` is zero.
    pub fn from_fn(threshold: u64, period: u64, mut f: impl FnMut(u64) -> bool) -> Self {
        assert!(period > 0, "period must be positive");
        let prefix = (0..threshold).filter(|&n| f(n)).collect();
        let mut pattern = vec![false; period as usize];
        for n in threshold..threshold + period {
            pattern[(n % period) as usize] = f(n);
        }
        EpSet {
            threshold,
            pattern,
            prefix,
        }
        .normalize()
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.pattern.len() as u64
    }

    pub fn residues(&self) -> impl Iterator<Item = u64> + '_ {
        self.pattern
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(r, _)| r as u64)
    }

    /// Members below the threshold.
    pub fn exceptions(&self) -> impl Iterator<Item = u64> + '_ {
        self.prefix.iter().copied()
    }

    /// First index past which one full period decides every membership.
    pub fn horizon(&self) -> u64 {
        self.threshold + self.period()
    }

    pub fn contains(&self, n: u64) -> bool {
        if n < self.threshold {
            self.prefix.contains(&n)
        } else {
            self.pattern[(n % self.period()) as usize]
        }
    }

    pub fn complement(&self) -> Self {
        EpSet {
            threshold: self.threshold,
            pattern: self.pattern.iter().map(|b| !b).collect(),
            prefix: (0..self.threshold)
                .filter(|n| !self.prefix.contains(n))
                .collect(),
        }
        .normalize()
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        let threshold = self.threshold.max(other.threshold);
        let period = self.period().lcm(&other.period());
        Self::from_fn(threshold, period, |n| {
            op(self.contains(n), other.contains(n))
        })
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && !b)
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.pattern.iter().all(|b| !b)
    }

    pub fn is_full(&self) -> bool {
        self.complement().is_empty()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersect(other).is_empty()
    }

    pub fn classify(&self) -> Classification {
        if self.pattern.iter().all(|b| !b) {
            Classification::Finite
        } else if self.pattern.iter().all(|&b| b) {
            Classification::Cofinite
        } else {
            Classification::Neither
        }
    }

    pub fn is_finite(&self) -> bool {
        self.classify() == Classification::Finite
    }

    /// Canonical form: minimal period, then minimal threshold.
    pub fn normalize(&self) -> Self {
        let period = self.pattern.len();
        let minimal = (1..=period)
            .filter(|d| period.is_multiple_of(*d))
            .find(|&d| (0..period).all(|r| self.pattern[r] == self.pattern[r % d]))
            .unwrap_or(period);
        let pattern = self.pattern[..minimal].to_vec();
        let mut prefix = self.prefix.clone();
        let mut threshold = self.threshold;
        while threshold > 0 {
            let n = threshold - 1;
            if prefix.contains(&n) != pattern[(n % minimal as u64) as usize] {
                break;
            }
            prefix.remove(&n);
            threshold = n;
        }
        EpSet {
            threshold,
            pattern,
            prefix,
        }
    }

    fn is_canonical(&self) -> bool {
        let canon = self.normalize();
        canon.threshold == self.threshold && canon.pattern.len() == self.pattern.len()
    }
}

impl PartialEq for EpSet {
    fn eq(&self, other: &Self) -> bool {
        if self.is_canonical() && other.is_canonical() {
            self.threshold == other.threshold
                && self.pattern == other.pattern
                && self.prefix == other.prefix
        } else {
            self.normalize() == other.normalize()
        }
    }
}

impl Eq for EpSet {}

impl fmt::Display for EpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |it: &mut dyn Iterator<Item = u64>| {
            it.map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
        };
        write!(
            f,
            "{{prefix: [{}], from: {}, mod: {}, residues: [{}]}}",
            join(&mut self.exceptions()),
            self.threshold,
            self.period(),
            join(&mut self.residues())
        )
    }
}

impl FromStr for EpSet {
    type Err = EpSetError;

    /// Parses `{prefix: [n,...], from: N0, mod: p, residues: [r,...]}`.
    /// Fields may appear in any order; `prefix` and `from` default to empty
    /// and zero.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cur = Cursor { src: s, pos: 0 };
        cur.expect('{')?;
        let (mut prefix, mut from, mut modulus, mut residues) = (Vec::new(), 0, None, None);
        loop {
            cur.skip_ws();
            if cur.eat('}') {
                break;
            }
            let key = cur.ident()?;
            cur.expect(':')?;
            match key.as_str() {
                "prefix" => prefix = cur.list()?,
                "from" => from = cur.number()?,
                "mod" => modulus = Some(cur.number()?),
                "residues" => residues = Some(cur.list()?),
                other => return Err(cur.error(format!("unknown field `{other}`"))),
            }
            cur.skip_ws();
            if !cur.eat(',') {
                cur.expect('}')?;
                break;
            }
        }
        cur.skip_ws();
        if cur.pos != s.len() {
            return Err(cur.error("trailing input".into()));
        }
        let modulus = modulus.ok_or_else(|| cur.error("missing field `mod`".into()))?;
        EpSet::new(prefix, from, modulus, residues.unwrap_or_default())
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn error(&self, msg: String) -> EpSetError {
        EpSetError::Syntax { pos: self.pos, msg }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), EpSetError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &str {
        self.skip_ws();
        let start = self.pos;
        let len = self.rest().find(|c| !pred(c)).unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..self.pos]
    }

    fn ident(&mut self) -> Result<String, EpSetError> {
        let word = self.take_while(|c| c.is_ascii_alphabetic());
        if word.is_empty() {
            Err(self.error("expected a field name".into()))
        } else {
            Ok(word.to_string())
        }
    }

    fn number(&mut self) -> Result<u64, EpSetError> {
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits
            .parse()
            .map_err(|_| self.error("expected a natural number".into()))
    }

    fn list(&mut self) -> Result<Vec<u64>, EpSetError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(self.number()?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }
}
