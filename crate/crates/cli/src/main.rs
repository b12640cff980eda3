//! `nsdigraph`: build and query nonstandard digraphs from family specs.

mod check;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsdigraph::dot::{digraph_dot, graph_dot, ns_dot};
use nsdigraph::format::{parse_spec, SpecFile};
use nsdigraph::{
    forget, forget_ns, ElementKind, EpSequence, EpSet, NsClass, NsDigraph, OracleKind, Rank,
    Ultrafilter, Ultrapower,
};

#[derive(Parser)]
#[command(
    name = "nsdigraph",
    version,
    about = "Nonstandard transfinite digraphs by ultrapower"
)]
struct Cli {
    /// Ultrafilter oracle: principal:<n0>, multiples or lazyfip:<seed>.
    #[arg(long, global = true, default_value = "multiples")]
    oracle: OracleKind,
    /// Rank to build: a natural number, warrow or omega. Defaults to the
    /// family rank.
    #[arg(long, global = true)]
    rank: Option<Rank>,
    /// Period bound for enumeration; a multiple of the family period.
    /// Defaults to the family period.
    #[arg(long, global = true)]
    resolution: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a spec file.
    Validate { spec: PathBuf },
    /// Build the nonstandard digraph and print class counts and
    /// representatives.
    Build { spec: PathBuf },
    /// Answer a question about named sequences or sets of the spec file.
    Query {
        spec: PathBuf,
        #[command(subcommand)]
        query: Query,
    },
    /// List the nonstandard classes of one kind.
    Enumerate {
        spec: PathBuf,
        /// arc, end, or a ditip rank (k or warrow).
        #[arg(long, value_parser = parse_kind)]
        kind: ElementKind,
    },
    /// Write DOT for the nonstandard digraph, or for one standard member.
    Export {
        spec: PathBuf,
        /// Export this standard member instead.
        #[arg(long)]
        member: Option<String>,
        /// Export the underlying undirected graph.
        #[arg(long)]
        underlying: bool,
    },
    /// Run the independence and partition suites on the spec file.
    Check { spec: PathBuf },
}

#[derive(Subcommand)]
enum Query {
    /// Whether two sequences denote the same nonstandard element.
    Equal { s: String, t: String },
    /// Whether two sequences are shorted almost everywhere.
    Shorted { s: String, t: String },
    /// Nonstandard polarity of a ditip sequence.
    Polarity { s: String },
    /// Canonical nonstandard vertex holding a sequence's class.
    VertexOf { s: String },
    /// Oracle verdict on a named set or an EPSet literal.
    Decide { set: String },
}

fn parse_kind(s: &str) -> Result<ElementKind, String> {
    match s {
        "arc" => Ok(ElementKind::Arc),
        "end" => Ok(ElementKind::End),
        _ => match s.parse::<Rank>() {
            Ok(Rank::Omega) => Err("omega has no ditips; use warrow".into()),
            Ok(r) => Ok(ElementKind::Tip(r)),
            Err(_) => Err(format!(
                "unknown kind `{s}` (expected arc, end, k or warrow)"
            )),
        },
    }
}

/// A domain failure: exit status 1 with a diagnostic.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Output text and whether the command succeeded.
struct Report {
    text: String,
    ok: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, ok: true }
    }
}

struct Context {
    spec: SpecFile,
    oracle: Box<dyn Ultrafilter>,
    rank: Rank,
    resolution: u64,
}

impl Context {
    fn load(cli: &Cli, path: &PathBuf) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        let spec = parse_spec(&text).map_err(|e| Failure(format!("{}:{e}", path.display())))?;
        let rank = cli.rank.unwrap_or(spec.family.rank());
        let resolution = cli.resolution.unwrap_or(spec.family.period());
        Ok(Context {
            oracle: cli.oracle.instantiate(),
            spec,
            rank,
            resolution,
        })
    }

    fn seq(&self, name: &str) -> Result<&EpSequence, Failure> {
        self.spec
            .sequences
            .get(name)
            .ok_or_else(|| Failure(format!("no sequence named `{name}` in the spec file")))
    }

    fn ultrapower(&self) -> Ultrapower<'_, nsdigraph::RankedDigraph> {
        Ultrapower::new(&self.spec.family, self.oracle.as_ref())
    }

    fn build(&self) -> Result<NsDigraph, Failure> {
        Ok(self.ultrapower().build(self.rank, self.resolution)?)
    }
}

fn class_line(out: &mut String, c: &NsClass) {
    write!(out, "  {}  {}", c.label, c.rep).unwrap();
    if let Some(p) = c.polarity {
        write!(out, "  {p}").unwrap();
    }
    out.push('\n');
}

fn vertex_lines(
    out: &mut String,
    title: &str,
    classes: &[NsClass],
    vertices: &[nsdigraph::NsVertex],
) {
    writeln!(out, "{title}:").unwrap();
    for v in vertices {
        let members: Vec<&str> = v
            .members
            .iter()
            .map(|&m| classes[m].label.as_str())
            .collect();
        writeln!(out, "  {} = {{{}}}", v.label, members.join(", ")).unwrap();
    }
}

fn build_report(ns: &NsDigraph) -> String {
    let mut out = String::new();
    writeln!(out, "oracle {}", ns.oracle).unwrap();
    writeln!(
        out,
        "rank {}, resolution {}, governed by {}",
        ns.rank, ns.resolution, ns.governing
    )
    .unwrap();
    for (name, count) in ns.class_counts() {
        writeln!(out, "{name} {count}").unwrap();
    }
    writeln!(out, "arcs:").unwrap();
    for c in &ns.arcs {
        class_line(&mut out, c);
    }
    writeln!(out, "arc-ends:").unwrap();
    for (c, (arc, side)) in ns.ends.iter().zip(&ns.end_arcs) {
        writeln!(
            out,
            "  {}  {}  {} of {}",
            c.label,
            c.rep,
            side.suffix(),
            ns.arcs[*arc].label
        )
        .unwrap();
    }
    vertex_lines(&mut out, "V0", &ns.ends, &ns.v0);
    for level in ns.all_levels() {
        writeln!(out, "T{}:", level.tip_rank).unwrap();
        for c in &level.tips {
            class_line(&mut out, c);
        }
        let vr = nsdigraph::ultrapower::vertex_rank(level.tip_rank);
        vertex_lines(&mut out, &format!("V{vr}"), &level.tips, &level.vertices);
    }
    out
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Validate { spec } => {
            let ctx = Context::load(cli, spec)?;
            let family = &ctx.spec.family;
            let mut out = format!(
                "ok: {} members, rank {}, threshold {}, period {}, {} sequences, {} sets\n",
                family.members().len(),
                family.rank(),
                family.threshold(),
                family.period(),
                ctx.spec.sequences.len(),
                ctx.spec.sets.len()
            );
            for w in family.warnings() {
                writeln!(out, "warning: {w}").unwrap();
            }
            Ok(Report::ok(out))
        }
        Command::Build { spec } => {
            let ctx = Context::load(cli, spec)?;
            Ok(Report::ok(build_report(&ctx.build()?)))
        }
        Command::Query { spec, query } => {
            let ctx = Context::load(cli, spec)?;
            let up = ctx.ultrapower();
            let answer = match query {
                Query::Equal { s, t } => up.ns_equal(ctx.seq(s)?, ctx.seq(t)?)?.to_string(),
                Query::Shorted { s, t } => up.ns_shorted(ctx.seq(s)?, ctx.seq(t)?)?.to_string(),
                Query::Polarity { s } => up.ns_polarity(ctx.seq(s)?)?.to_string(),
                Query::VertexOf { s } => {
                    let v = up.ns_vertex_of(ctx.seq(s)?, ctx.resolution)?;
                    format!("{}  {}  rank {}", v.label, v.canonical, v.rank)
                }
                Query::Decide { set } => {
                    let set: EpSet = match ctx.spec.sets.get(set) {
                        Some(s) => s.clone(),
                        None => set.parse().map_err(|e| {
                            Failure(format!(
                                "`{set}` is neither a named set nor a valid literal: {e}"
                            ))
                        })?,
                    };
                    ctx.oracle.decide(&set).to_string()
                }
            };
            Ok(Report::ok(answer + "\n"))
        }
        Command::Enumerate { spec, kind } => {
            let ctx = Context::load(cli, spec)?;
            let classes = ctx.ultrapower().enumerate(*kind, ctx.resolution)?;
            let mut out = String::new();
            for c in &classes {
                class_line(&mut out, c);
            }
            Ok(Report::ok(out))
        }
        Command::Export {
            spec,
            member,
            underlying,
        } => {
            let ctx = Context::load(cli, spec)?;
            let text = match member {
                Some(name) => {
                    let d = ctx.spec.family.members().get(name).ok_or_else(|| {
                        Failure(format!("no member named `{name}` in the family"))
                    })?;
                    if *underlying {
                        graph_dot(name, &forget(d))
                    } else {
                        digraph_dot(name, d)
                    }
                }
                None => {
                    let ns = ctx.build()?;
                    let name = format!("ns_rank_{}", ns.rank);
                    if *underlying {
                        ns_dot(&name, &forget_ns(&ns))
                    } else {
                        ns_dot(&name, &ns)
                    }
                }
            };
            Ok(Report::ok(text))
        }
        Command::Check { spec } => {
            let ctx = Context::load(cli, spec)?;
            let ns = ctx.build()?;
            let up = ctx.ultrapower();
            let mut sequences: Vec<EpSequence> = ctx.spec.sequences.values().cloned().collect();
            sequences.extend(ns.ends.iter().map(|c| c.rep.clone()));
            for level in ns.all_levels() {
                sequences.extend(level.tips.iter().map(|c| c.rep.clone()));
            }
            let independence = check::independence(&up, &sequences)?;
            let partition = check::partition(&up, &ns)?;
            let mut out = String::new();
            for (name, tally) in [("independence", &independence), ("partition", &partition)] {
                writeln!(
                    out,
                    "{name}: {} passed, {} failed",
                    tally.passed,
                    tally.failed.len()
                )
                .unwrap();
                for f in &tally.failed {
                    writeln!(out, "  FAIL {f}").unwrap();
                }
            }
            let ok = independence.failed.is_empty() && partition.failed.is_empty();
            Ok(Report { text: out, ok })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(report) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &report.text) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{}", report.text);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
