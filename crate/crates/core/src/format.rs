//! The family-spec text format.
//!
//! Line oriented UTF-8 with `#` comments:
//!
//! ```text
//! digraph D rank 1 {
//!   arcs a, b;
//!   v0 x = {a.src, b.snk}, y = {a.snk, b.src};
//!   ditips0 t1:in, t2:out;
//!   v1 w = {t1, t2};
//! }
//! family rank 1 { prefix []; cycle [D]; }
//! seq s rank 0 { prefix [_]; cycle [t1, t2]; }
//! seq e end { prefix []; cycle [a.src]; }
//! set evens = {prefix: [], from: 0, mod: 2, residues: [0]};
//! ```
//!
//! `ditips<k>` declares rank-`k` ditips and `v<k+1>` partitions them;
//! `ditipsw` and `vomega` do the same for arrow-rank ditips. Ranks are
//! naturals, `warrow` or `omega`. `_` marks an absent sequence value. The
//! family rank defaults to the rank of its first cycle member.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::digraph::{
    ArcEnd, Block, DigraphError, DigraphParts, Element, ElementKind, Polarity, Rank, RankedDigraph,
    Side, TipLevel,
};
use crate::epset::EpSet;
use crate::family::{EpSequence, Family, FamilySpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: digraph `{name}` is malformed:\n{report}")]
    Invalid {
        line: usize,
        col: usize,
        name: String,
        report: String,
    },
}

/// A parsed spec file: the family plus named sequences and sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub family: FamilySpec,
    pub sequences: BTreeMap<String, EpSequence>,
    pub sets: BTreeMap<String, EpSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Word(&'a str),
    Punct(char),
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    tok: Tok<'a>,
    start: usize,
    end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '\'')
}

fn tokenize(src: &str) -> Result<Vec<Token<'_>>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '#' {
            while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                chars.next();
            }
        } else if is_word_char(c) {
            let mut end = i;
            while let Some(&(j, c)) = chars.peek() {
                if !is_word_char(c) {
                    break;
                }
                end = j + c.len_utf8();
                chars.next();
            }
            out.push(Token {
                tok: Tok::Word(&src[i..end]),
                start: i,
                end,
            });
        } else if "{}[];,=:.".contains(c) {
            chars.next();
            out.push(Token {
                tok: Tok::Punct(c),
                start: i,
                end: i + 1,
            });
        } else {
            let (line, col) = line_col(src, i);
            return Err(ParseError::Syntax {
                line,
                col,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, col)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token<'a>>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src.len(), |t| t.start)
    }

    fn error_at(&self, offset: usize, msg: impl Into<String>) -> ParseError {
        let (line, col) = line_col(self.src, offset);
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        self.error_at(self.offset(), msg)
    }

    fn peek(&self) -> Option<Tok<'a>> {
        self.toks.get(self.pos).map(|t| t.tok)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn word(&mut self) -> PResult<&'a str> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error("expected a name")),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        let at = self.offset();
        match self.word()? {
            w if w == kw => Ok(()),
            w => Err(self.error_at(at, format!("expected `{kw}`, found `{w}`"))),
        }
    }

    fn rank(&mut self) -> PResult<Rank> {
        let at = self.offset();
        let w = self.word()?;
        w.parse()
            .map_err(|e: crate::digraph::RankParseError| self.error_at(at, e.to_string()))
    }

    /// Comma separated items up to (not including) `close`.
    fn items<T>(
        &mut self,
        close: char,
        mut item: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.peek() == Some(Tok::Punct(close)) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if !self.eat(',') {
                return Ok(out);
            }
        }
    }

    fn end(&mut self) -> PResult<ArcEnd> {
        let arc = self.word()?;
        self.expect('.')?;
        let at = self.offset();
        let side = match self.word()? {
            "src" => Side::Source,
            "snk" => Side::Sink,
            other => {
                return Err(self.error_at(at, format!("expected `src` or `snk`, found `{other}`")))
            }
        };
        Ok(ArcEnd::new(arc, side))
    }

    fn blocks<T>(
        &mut self,
        mut member: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<Vec<Block<T>>> {
        let blocks = self.items(';', |p| {
            let name = p.word()?;
            p.expect('=')?;
            p.expect('{')?;
            let members = p.items('}', &mut member)?;
            p.expect('}')?;
            Ok(Block::new(name, members))
        })?;
        self.expect(';')?;
        Ok(blocks)
    }

    fn digraph(&mut self) -> PResult<(String, RankedDigraph)> {
        let start = self.offset();
        let name = self.word()?.to_string();
        self.keyword("rank")?;
        let mut parts = DigraphParts::new(self.rank()?);
        self.expect('{')?;
        while !self.eat('}') {
            let at = self.offset();
            let kw = self.word()?;
            if kw == "arcs" {
                parts.arcs = self.items(';', |p| p.word().map(str::to_string))?;
                self.expect(';')?;
            } else if kw == "v0" {
                parts.v0 = self.blocks(Self::end)?;
            } else if let Some(level) = kw.strip_prefix("ditips") {
                let rank = tip_rank(level)
                    .ok_or_else(|| self.error_at(at, format!("bad ditip rank in `{kw}`")))?;
                let tips = self.items(';', |p| {
                    let id = p.word()?.to_string();
                    p.expect(':')?;
                    let at = p.offset();
                    let pol = match p.word()? {
                        "in" => Polarity::Intip,
                        "out" => Polarity::Outtip,
                        other => {
                            return Err(
                                p.error_at(at, format!("expected `in` or `out`, found `{other}`"))
                            )
                        }
                    };
                    Ok((id, pol))
                })?;
                self.expect(';')?;
                parts.level_mut(rank).tips = tips;
            } else if let Some(level) = kw.strip_prefix('v') {
                let rank = below_vertex_rank(level)
                    .ok_or_else(|| self.error_at(at, format!("unknown section `{kw}`")))?;
                let blocks = self.blocks(|p| p.word().map(str::to_string))?;
                parts.level_mut(rank).vertices = blocks;
            } else {
                return Err(self.error_at(at, format!("unknown section `{kw}`")));
            }
        }
        let d = RankedDigraph::new(parts).map_err(|e| {
            let (line, col) = line_col(self.src, start);
            let report = match e {
                DigraphError::Invalid(r) => r.to_string(),
                other => other.to_string(),
            };
            ParseError::Invalid {
                line,
                col,
                name: name.clone(),
                report,
            }
        })?;
        Ok((name, d))
    }

    fn name_list(&mut self, kw: &str) -> PResult<Vec<(String, usize)>> {
        self.keyword(kw)?;
        self.expect('[')?;
        let names = self.items(']', |p| {
            let at = p.offset();
            p.word().map(|w| (w.to_string(), at))
        })?;
        self.expect(']')?;
        self.expect(';')?;
        Ok(names)
    }

    fn value(&mut self, kind: ElementKind) -> PResult<Option<Element>> {
        if self.peek() == Some(Tok::Word("_")) {
            self.pos += 1;
            return Ok(None);
        }
        Ok(Some(match kind {
            ElementKind::Arc => Element::Arc(self.word()?.to_string()),
            ElementKind::End => Element::End(self.end()?),
            ElementKind::Tip(_) => Element::Tip(self.word()?.to_string()),
        }))
    }

    fn value_list(&mut self, kw: &str, kind: ElementKind) -> PResult<Vec<Option<Element>>> {
        self.keyword(kw)?;
        self.expect('[')?;
        let vals = self.items(']', |p| p.value(kind))?;
        self.expect(']')?;
        self.expect(';')?;
        Ok(vals)
    }

    fn set_literal(&mut self) -> PResult<EpSet> {
        let start = self.offset();
        self.expect('{')?;
        let mut depth = 1;
        let mut end = start;
        while depth > 0 {
            let t = self
                .toks
                .get(self.pos)
                .ok_or_else(|| self.error("unterminated set"))?;
            match t.tok {
                Tok::Punct('{') => depth += 1,
                Tok::Punct('}') => depth -= 1,
                _ => {}
            }
            end = t.end;
            self.pos += 1;
        }
        self.src[start..end]
            .parse()
            .map_err(|e: crate::epset::EpSetError| self.error_at(start, e.to_string()))
    }
}

fn tip_rank(suffix: &str) -> Option<Rank> {
    match suffix {
        "w" => Some(Rank::ArrowOmega),
        _ => suffix.parse().ok().map(Rank::Finite),
    }
}

/// Rank of the ditips partitioned by vertex section `v<suffix>`.
fn below_vertex_rank(suffix: &str) -> Option<Rank> {
    match suffix {
        "omega" => Some(Rank::ArrowOmega),
        _ => match suffix.parse::<u32>().ok()? {
            0 => None,
            k => Some(Rank::Finite(k - 1)),
        },
    }
}

/// Parses and validates a spec file.
pub fn parse_spec(text: &str) -> Result<SpecFile, ParseError> {
    let mut p = Parser {
        src: text,
        toks: tokenize(text)?,
        pos: 0,
    };
    let mut digraphs = BTreeMap::new();
    let mut family = None;
    let mut raw_seqs = Vec::new();
    let mut sets = BTreeMap::new();
    while p.pos < p.toks.len() {
        let at = p.offset();
        match p.word()? {
            "digraph" => {
                let (name, d) = p.digraph()?;
                if digraphs.insert(name.clone(), d).is_some() {
                    return Err(p.error_at(at, format!("duplicate digraph `{name}`")));
                }
            }
            "family" => {
                if family.is_some() {
                    return Err(p.error_at(at, "duplicate family block"));
                }
                let rank = if p.peek() == Some(Tok::Word("rank")) {
                    p.pos += 1;
                    Some(p.rank()?)
                } else {
                    None
                };
                p.expect('{')?;
                let prefix = p.name_list("prefix")?;
                let cycle = p.name_list("cycle")?;
                p.expect('}')?;
                family = Some((at, rank, prefix, cycle));
            }
            "seq" => {
                let name = p.word()?.to_string();
                let kind_at = p.offset();
                let kind = match p.word()? {
                    "rank" => {
                        let r = p.rank()?;
                        if r == Rank::Omega {
                            return Err(p.error_at(kind_at, "no ditips of rank omega"));
                        }
                        ElementKind::Tip(r)
                    }
                    "arc" => ElementKind::Arc,
                    "end" => ElementKind::End,
                    other => {
                        return Err(p.error_at(kind_at, format!("unknown sequence kind `{other}`")))
                    }
                };
                p.expect('{')?;
                let prefix = p.value_list("prefix", kind)?;
                let cycle = p.value_list("cycle", kind)?;
                p.expect('}')?;
                raw_seqs.push((at, name, kind, prefix, cycle));
            }
            "set" => {
                let name = p.word()?.to_string();
                p.expect('=')?;
                let set = p.set_literal()?;
                p.expect(';')?;
                if sets.insert(name.clone(), set).is_some() {
                    return Err(p.error_at(at, format!("duplicate set `{name}`")));
                }
            }
            other => return Err(p.error_at(at, format!("unexpected `{other}`"))),
        }
    }
    let (fam_at, rank, prefix, cycle) = family.ok_or_else(|| p.error("missing family block"))?;
    for (name, at) in prefix.iter().chain(&cycle) {
        if !digraphs.contains_key(name) {
            return Err(p.error_at(*at, format!("unknown digraph `{name}`")));
        }
    }
    let names = |v: Vec<(String, usize)>| v.into_iter().map(|(n, _)| n).collect::<Vec<_>>();
    let rank = match (rank, cycle.first()) {
        (Some(r), _) => r,
        (None, Some((first, _))) => digraphs[first].rank(),
        (None, None) => return Err(p.error_at(fam_at, "family cycle is empty")),
    };
    let family = Family::new(digraphs, names(prefix), names(cycle), rank)
        .map_err(|e| p.error_at(fam_at, e.to_string()))?;
    let mut sequences = BTreeMap::new();
    for (at, name, kind, prefix, cycle) in raw_seqs {
        let seq = EpSequence::new(kind, prefix, cycle)
            .and_then(|s| s.check_against(&family).map(|_| s))
            .map_err(|e| p.error_at(at, format!("sequence `{name}`: {e}")))?;
        if sequences.insert(name.clone(), seq).is_some() {
            return Err(p.error_at(at, format!("duplicate sequence `{name}`")));
        }
    }
    Ok(SpecFile {
        family,
        sequences,
        sets,
    })
}

fn write_level(out: &mut String, level: &TipLevel, tips_kw: &str, v_kw: &str) -> fmt::Result {
    let tips: Vec<String> = level
        .tips
        .iter()
        .map(|(id, pol)| {
            let p = match pol {
                Polarity::Intip => "in",
                Polarity::Outtip => "out",
            };
            format!("{id}:{p}")
        })
        .collect();
    writeln!(out, "  {tips_kw} {};", tips.join(", "))?;
    write_blocks(out, v_kw, &level.vertices)
}

fn write_blocks<T: fmt::Display>(out: &mut String, kw: &str, blocks: &[Block<T>]) -> fmt::Result {
    let blocks: Vec<String> = blocks
        .iter()
        .map(|b| {
            let members: Vec<String> = b.members.iter().map(T::to_string).collect();
            format!("{} = {{{}}}", b.name, members.join(", "))
        })
        .collect();
    writeln!(out, "  {kw} {};", blocks.join(", "))
}

/// Renders a spec file in the text format; [`parse_spec`] reads it back
/// to an equal value.
pub fn print_spec(spec: &SpecFile) -> String {
    let mut out = String::new();
    render(&mut out, spec).expect("writing to a String");
    out
}

fn render(out: &mut String, spec: &SpecFile) -> fmt::Result {
    for (name, d) in spec.family.members() {
        let p = d.parts();
        writeln!(out, "digraph {name} rank {} {{", p.rank)?;
        writeln!(out, "  arcs {};", p.arcs.join(", "))?;
        write_blocks(out, "v0", &p.v0)?;
        for (k, level) in p.levels.iter().enumerate() {
            write_level(out, level, &format!("ditips{k}"), &format!("v{}", k + 1))?;
        }
        if let Some(level) = &p.arrow {
            write_level(out, level, "ditipsw", "vomega")?;
        }
        writeln!(out, "}}")?;
    }
    let f = &spec.family;
    writeln!(
        out,
        "family rank {} {{ prefix [{}]; cycle [{}]; }}",
        f.rank(),
        f.prefix_names().join(", "),
        f.cycle_names().join(", ")
    )?;
    for (name, s) in &spec.sequences {
        let kind = match s.kind() {
            ElementKind::Arc => "arc".to_string(),
            ElementKind::End => "end".to_string(),
            ElementKind::Tip(r) => format!("rank {r}"),
        };
        writeln!(out, "seq {name} {kind} {{ {s} }}")?;
    }
    for (name, set) in &spec.sets {
        writeln!(out, "set {name} = {set};")?;
    }
    Ok(())
}
