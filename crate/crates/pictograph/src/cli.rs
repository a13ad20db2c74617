//! Subcommands of the `pictograph` binary.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use pictograph_core::builder::{enumerate_cubic_spines, BuildError, EnumOptions};
use pictograph_core::cubic::{
    cubic_twist_periods, marked_data, marked_levels, pictograph_from_truncated, relative_moduli, spine_descriptor,
    tau_from_spine, top_count, tree_code, CubicError, TauSequence, TreeCode, TruncatedSpine,
};
use pictograph_core::lamination::{LaminationError, Rat, Violation};
use pictograph_core::pictograph::{Pictograph, PictographError, Role};
use pictograph_core::tree::{TreeError, TreeViolation};
use pictograph_core::twistlat::{analyze, ConjugacyReport, TopCount, TwistError};

use crate::json::{
    parse_rat, rat_to_string, role_name, Document, Envelope, FormatError, MarkedLevelJson, ReportJson, SpineJson,
    TauReportJson, TreeJson,
};
use crate::svg::{self, Panel, DEFAULT_DEPTH};

#[derive(Parser, Debug)]
#[command(
    name = "pictograph",
    version,
    about = "Pictographs, τ-sequences and conjugacy counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Svg,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Marked levels, moduli, twist periods and Top(D) of a cubic τ-sequence.
    AnalyzeTau {
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        tau: Vec<u32>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        fund_edges: u8,
        /// Descriptor levels to analyze for the lattice table (all by default).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Lists every truncated cubic spine of a given length.
    Enumerate {
        #[arg(long)]
        length: u32,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        fund_edges: Option<u8>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        tau: Option<Vec<u32>>,
        #[arg(long)]
        cap: Option<u32>,
    },
    /// Tree codes of a spine file, or of every spine with a given τ.
    TreeCode {
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "input", required_unless_present = "input")]
        tau: Option<Vec<u32>>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        fund_edges: u8,
        #[arg(long)]
        cap: Option<u32>,
        /// Tree depth below `v0` for JSON output of a spine file.
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// Height of `v0` in the emitted tree.
        #[arg(long, default_value = "1", value_parser = parse_height)]
        height: Rat,
    },
    /// Top(D) of a spine file, with its lattice table for two fundamental edges.
    SpineTop {
        input: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Runs the twist-lattice induction on a descriptor file.
    DescriptorAnalyze {
        input: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Checks every invariant that applies to a document.
    Validate {
        input: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Draws a lamination, spine or pictograph document as SVG.
    Render {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
}

#[derive(serde::Serialize)]
struct TreeCodeJson {
    tree_code: Vec<(u32, u32)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree: Option<Envelope>,
}

fn parse_height(s: &str) -> Result<Rat, String> {
    match parse_rat(s) {
        Ok(h) if h > Rat::from_integer(0) => Ok(h),
        _ => Err(format!("{s:?} is not a positive rational")),
    }
}

impl Command {
    pub fn default_format(&self) -> Format {
        match self {
            Command::Enumerate { .. } => Format::Json,
            Command::Render { .. } => Format::Svg,
            _ => Format::Text,
        }
    }

    pub fn accepts(&self, f: Format) -> bool {
        match self {
            Command::Render { .. } => f == Format::Svg,
            _ => f != Format::Svg,
        }
    }
}

/// Longest τ that `analyze-tau` looks up in the census; the worst case at
/// this length takes a few seconds.
const LOOKUP_LEN: u32 = 7;

/// A domain failure: a short machine-readable code and a message.
#[derive(Debug, thiserror::Error)]
#[error("error[{code}]: {message}")]
pub struct Failure {
    pub code: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn violation_code(v: &Violation) -> &'static str {
    match v {
        Violation::Degenerate(_) => "degenerate",
        Violation::Overlap(_, _) => "overlap",
        Violation::Linked(_, _) => "unlinked",
        Violation::MarkOnClass(_) => "mark-on-class",
    }
}

impl From<LaminationError> for Failure {
    fn from(e: LaminationError) -> Self {
        let code = match &e {
            LaminationError::Invalid(v) => violation_code(v),
            LaminationError::NotAPoint(_) => "not-a-point",
            LaminationError::NotInGap(_) => "not-in-gap",
            LaminationError::RiemannHurwitz { .. } => "riemann-hurwitz",
            _ => "cover",
        };
        Failure::new(code, e.to_string())
    }
}

impl From<CubicError> for Failure {
    fn from(e: CubicError) -> Self {
        let code = match &e {
            CubicError::FundEdges(_) => "fund-edges",
            CubicError::TauTooLarge { .. } => "tau-too-large",
            CubicError::TauJump { .. } => "tau-jump",
            CubicError::TauTooLong(_) => "tau-too-long",
            CubicError::BadLevel(_) => "first-return",
            CubicError::NonMonotone(_) | CubicError::NonDyadic(_) => "marked-levels",
            CubicError::EmptySpine => "empty-spine",
            CubicError::Lamination(l) => return Failure::from(l.clone()),
        };
        Failure::new(code, e.to_string())
    }
}

impl From<TwistError> for Failure {
    fn from(e: TwistError) -> Self {
        let code = match &e {
            TwistError::OrbitLength { .. } => "orbit-length",
            TwistError::BadVertex { .. } | TwistError::BadDescriptor => "descriptor",
            TwistError::Rank { .. } | TwistError::Dimension { .. } => "dimension",
            TwistError::NonIntegralCount { .. } => "count-integrality",
            TwistError::NonIntegralTop { .. } => "top-integrality",
            TwistError::Shrinking { .. } => "count-monotonicity",
            TwistError::Unstable => "stabilization",
            TwistError::BoundExceeded { .. } => "search-bound",
            TwistError::AutOrder { .. } | TwistError::NotSublattice => "lattice",
            TwistError::Overflow => "overflow",
        };
        Failure::new(code, e.to_string())
    }
}

impl From<TreeError> for Failure {
    fn from(e: TreeError) -> Self {
        Failure::new("tree", e.to_string())
    }
}

fn tree_violation_code(v: &TreeViolation) -> &'static str {
    match v {
        TreeViolation::Endpoint(_) => "tree-endpoint",
        TreeViolation::Height(_) => "tree-height",
        TreeViolation::Simplicial(_) => "tree-simplicial",
        TreeViolation::LocalDegree { .. } | TreeViolation::EdgeDegree(_) => "tree-local-degree",
        TreeViolation::CriticalPoint { .. } => "tree-critical-points",
        TreeViolation::TopDegree { .. } => "tree-degree",
        TreeViolation::Fundamental(_) => "tree-fundamental",
    }
}

impl From<PictographError> for Failure {
    fn from(e: PictographError) -> Self {
        match e {
            PictographError::Tree(t) => t.into(),
            e => Failure::new("pictograph", e.to_string()),
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Cubic(c) => c.into(),
            BuildError::Lamination(l) => l.into(),
            BuildError::Cap { .. } => Failure::new("cap", e.to_string()),
            e => Failure::new("builder", e.to_string()),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Lamination(l) => l.into(),
            FormatError::Cubic(c) => c.into(),
            FormatError::Tree(t) => t.into(),
            FormatError::Version(_) => Failure::new("version", e.to_string()),
            e => Failure::new("parse", e.to_string()),
        }
    }
}

fn read_document(path: &PathBuf) -> Result<Document, Failure> {
    let s = std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
    Ok(Document::from_json(&s)?)
}

fn pairs_text(code: &TreeCode) -> String {
    code.pairs
        .iter()
        .map(|(k, t)| format!("({k},{t})"))
        .collect::<Vec<_>>()
        .join(",")
}

fn list_text<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn top_text(t: TopCount) -> String {
    match t {
        TopCount::Finite(n) => n.to_string(),
        TopCount::Infinite => "infinite".into(),
    }
}

fn descriptor_report(s: &TruncatedSpine, depth: Option<usize>) -> Result<ConjugacyReport, Failure> {
    let desc = spine_descriptor(s)?;
    let depth = depth.unwrap_or(desc.levels.len());
    Ok(analyze(&desc, depth)?)
}

/// The `analyze-tau` data for `tau`; `spine` supplies the lattice table.
pub fn tau_report(
    tau: &TauSequence,
    spine: Option<&TruncatedSpine>,
    depth: Option<usize>,
) -> Result<(TauReportJson, Option<ConjugacyReport>), Failure> {
    let report = match spine {
        Some(s) if s.fund_edges() == 2 && !s.is_empty() => Some(descriptor_report(s, depth)?),
        _ => None,
    };
    let json = TauReportJson {
        tau: tau.values().to_vec(),
        fund_edges: tau.fund_edges(),
        marked_levels: marked_levels(tau),
        relative_moduli: relative_moduli(tau).into_iter().map(rat_to_string).collect(),
        marked: marked_data(tau)
            .into_iter()
            .map(|m| MarkedLevelJson {
                level: m.level,
                modulus: rat_to_string(m.modulus),
                twist: m.twist,
            })
            .collect(),
        twist_periods: cubic_twist_periods(tau),
        top: top_count(tau),
        report: report.as_ref().map(ReportJson::from),
    };
    Ok((json, report))
}

fn report_text(out: &mut String, r: &ConjugacyReport) {
    let _ = writeln!(out, "base lattice: {}", r.base);
    for (i, l) in r.per_level.iter().enumerate() {
        let lattices: Vec<String> = l
            .groups
            .iter()
            .map(|g| format!("{}x{} aut {}", g.count, g.lattice, g.aut))
            .collect();
        let _ = writeln!(
            out,
            "level {i}: |B| = {}, Top = {}, classes: {}",
            l.class_count,
            l.top,
            lattices.join("; ")
        );
    }
    let _ = writeln!(out, "Top(D) = {}", top_text(r.top));
}

fn tau_report_text(j: &TauReportJson, r: Option<&ConjugacyReport>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tau: {}, fundamental edges: {}", list_text(&j.tau), j.fund_edges);
    let marked = if j.marked_levels.len() > 1 {
        list_text(&j.marked_levels[1..])
    } else {
        "none".into()
    };
    let _ = writeln!(out, "marked levels: {marked}");
    let _ = writeln!(out, "relative moduli: {}", j.relative_moduli.join(","));
    for (i, m) in j.marked.iter().enumerate().skip(1) {
        let _ = writeln!(out, "l_{i} = {}: m_{i} = {}, t_{i} = {}", m.level, m.modulus, m.twist);
    }
    let _ = writeln!(out, "twist periods T_n: {}", list_text(&j.twist_periods));
    let _ = writeln!(out, "Top(D) = {}", j.top);
    if let Some(r) = r {
        report_text(&mut out, r);
    }
    out
}

fn tau_sequence(values: &[u32], fe: u8) -> Result<TauSequence, Failure> {
    Ok(TauSequence::new(values.to_vec(), fe)?)
}

fn census(
    len: u32,
    fund_edges: Option<u8>,
    tau: Option<TauSequence>,
    cap: Option<u32>,
) -> Result<Vec<TruncatedSpine>, Failure> {
    let opts = EnumOptions { tau, fund_edges, cap };
    Ok(enumerate_cubic_spines(len, &opts)?)
}

fn summary(s: &TruncatedSpine) -> SpineJson {
    let tau = tau_from_spine(s);
    SpineJson::from_spine(s).with_summary(tau.values(), &tree_code(s), top_count(&tau))
}

fn render_json(doc: &Document) -> String {
    let mut s = doc.to_json_pretty();
    s.push('\n');
    s
}

/// Runs one subcommand and returns what it prints.
pub fn run(cmd: &Command, format: Format) -> Result<String, Failure> {
    match cmd {
        Command::AnalyzeTau { tau, fund_edges, depth } => {
            let seq = tau_sequence(tau, *fund_edges)?;
            let len = seq.len() as u32;
            let spine = if len <= LOOKUP_LEN {
                let found = census(len, Some(*fund_edges), Some(seq.clone()), None)?
                    .into_iter()
                    .next();
                if found.is_none() {
                    return Err(Failure::new(
                        "unrealized",
                        format!(
                            "no spine with {fund_edges} fundamental edge(s) has τ {}",
                            list_text(seq.values())
                        ),
                    ));
                }
                found
            } else {
                None
            };
            let (j, r) = tau_report(&seq, spine.as_ref(), *depth)?;
            Ok(match format {
                Format::Json => render_json(&Document::TauReport(j)),
                _ => {
                    let mut text = tau_report_text(&j, r.as_ref());
                    if len > LOOKUP_LEN {
                        let _ = writeln!(text, "not checked against the census beyond length {LOOKUP_LEN}");
                    }
                    text
                }
            })
        }
        Command::Enumerate {
            length,
            fund_edges,
            tau,
            cap,
        } => {
            let seq = match tau {
                Some(t) => Some(tau_sequence(t, fund_edges.unwrap_or(1))?),
                None => None,
            };
            let spines = census(*length, *fund_edges, seq, *cap)?;
            let mut out = String::new();
            for s in &spines {
                let j = summary(s);
                match format {
                    Format::Json => {
                        out.push_str(&Document::Spine(j).to_json());
                        out.push('\n');
                    }
                    _ => {
                        let code = tree_code(s);
                        let _ = writeln!(
                            out,
                            "tau={} fe={} code={} top={}",
                            list_text(j.tau.as_deref().unwrap_or(&[])),
                            s.fund_edges(),
                            pairs_text(&code),
                            j.top.unwrap_or(1)
                        );
                    }
                }
            }
            Ok(out)
        }
        Command::TreeCode {
            input,
            tau,
            fund_edges,
            cap,
            depth,
            height,
        } => {
            if let Some(path) = input {
                let s = spine_from(read_document(path)?)?;
                let code = tree_code(&s);
                return Ok(match format {
                    Format::Json => {
                        let tree = if s.is_empty() {
                            None
                        } else {
                            let p = pictograph_from_truncated(&s)?;
                            let cutoff = Rat::new(1, 3i64.pow(*depth));
                            Some(Envelope::new(Document::Tree(
                                TreeJson::from(&p.tree(cutoff)?).scaled(*height),
                            )))
                        };
                        let mut out = serde_json::to_string_pretty(&TreeCodeJson {
                            tree_code: code.pairs,
                            tree,
                        })
                        .expect("documents serialize");
                        out.push('\n');
                        out
                    }
                    _ => format!("{}\n", pairs_text(&code)),
                });
            }
            let values = tau.as_deref().expect("clap requires --tau without an input");
            let seq = tau_sequence(values, *fund_edges)?;
            let spines = census(seq.len() as u32, Some(*fund_edges), Some(seq), *cap)?;
            let mut codes: BTreeMap<TreeCode, usize> = BTreeMap::new();
            for s in &spines {
                *codes.entry(tree_code(s)).or_default() += 1;
            }
            Ok(match format {
                Format::Json => {
                    let list: Vec<_> = codes
                        .iter()
                        .map(|(c, n)| serde_json::json!({ "tree_code": c.pairs, "spines": n }))
                        .collect();
                    let mut s = serde_json::to_string_pretty(&list).expect("values serialize");
                    s.push('\n');
                    s
                }
                _ => codes
                    .iter()
                    .map(|(c, n)| format!("{} spines={n}\n", pairs_text(c)))
                    .collect(),
            })
        }
        Command::SpineTop { input, depth } => {
            let s = spine_from(read_document(input)?)?;
            let (j, r) = tau_report(&tau_from_spine(&s), Some(&s), *depth)?;
            Ok(match format {
                Format::Json => render_json(&Document::TauReport(j)),
                _ => tau_report_text(&j, r.as_ref()),
            })
        }
        Command::DescriptorAnalyze { input, depth } => {
            let desc = match read_document(input)? {
                Document::Descriptor(d) => d.to_descriptor()?,
                other => return Err(wrong_kind("descriptor", &other)),
            };
            let r = analyze(&desc, depth.unwrap_or(desc.levels.len()))?;
            Ok(match format {
                Format::Json => render_json(&Document::Report(ReportJson::from(&r))),
                _ => {
                    let mut out = String::new();
                    report_text(&mut out, &r);
                    out
                }
            })
        }
        Command::Validate { input, depth } => {
            let doc = read_document(input)?;
            validate(&doc, *depth)?;
            Ok(match format {
                Format::Json => format!("{}\n", serde_json::json!({ "ok": true, "kind": doc.kind() })),
                _ => format!("ok: valid {}\n", doc.kind()),
            })
        }
        Command::Render { input, depth } => render(&read_document(input)?, *depth),
    }
}

fn wrong_kind(expected: &str, doc: &Document) -> Failure {
    Failure::new("kind", format!("expected a {expected} document, found {}", doc.kind()))
}

fn spine_from(doc: Document) -> Result<TruncatedSpine, Failure> {
    match doc {
        Document::Spine(s) => Ok(s.to_spine()?),
        other => Err(wrong_kind("spine", &other)),
    }
}

fn check_pictograph(p: &Pictograph) -> Result<(), Failure> {
    if p.degree() <= 3 {
        let lowest = p.rows().last().map_or(Rat::from_integer(1), |r| r.height);
        let t = p.tree(lowest / 9)?;
        if let Some(v) = t.violations().first() {
            return Err(Failure::new(tree_violation_code(v), v.to_string()));
        }
    }
    Ok(())
}

/// Every invariant that applies to `doc`; the first failure is returned.
pub fn validate(doc: &Document, depth: Option<usize>) -> Result<(), Failure> {
    match doc {
        Document::Lamination(l) => {
            let base = l.lamination.to_lamination()?;
            if let Some(v) = base.violations().first() {
                return Err(Failure::new(violation_code(v), v.to_string()));
            }
            l.to_labelled()?;
        }
        Document::Spine(j) => {
            for lvl in &j.levels {
                let base = lvl.lamination.to_lamination()?;
                if let Some(v) = base.violations().first() {
                    return Err(Failure::new(violation_code(v), v.to_string()));
                }
            }
            let s = j.to_spine()?;
            let mismatch =
                |what: &str| Failure::new("summary-mismatch", format!("recorded {what} disagrees with the levels"));
            let tau = tau_from_spine(&s);
            if j.tau.as_ref().is_some_and(|t| t != tau.values()) {
                return Err(mismatch("tau"));
            }
            if j.tree_code.as_ref().is_some_and(|c| *c != tree_code(&s).pairs) {
                return Err(mismatch("tree code"));
            }
            if j.top.is_some_and(|t| t != top_count(&tau)) {
                return Err(mismatch("top"));
            }
            if s.fund_edges() == 2 && !s.is_empty() {
                let r = descriptor_report(&s, depth)?;
                if r.top != TopCount::Finite(top_count(&tau)) {
                    return Err(Failure::new(
                        "top-formula",
                        "lattice count disagrees with the τ formula",
                    ));
                }
            }
            if !s.is_empty() {
                check_pictograph(&pictograph_from_truncated(&s)?)?;
            }
        }
        Document::Descriptor(d) => {
            let desc = d.to_descriptor()?;
            analyze(&desc, depth.unwrap_or(desc.levels.len()))?;
        }
        Document::Report(_) => {}
        Document::Tree(t) => {
            let tree = t.to_tree()?;
            if let Some(v) = tree.violations().first() {
                return Err(Failure::new(tree_violation_code(v), v.to_string()));
            }
        }
        Document::Pictograph(p) => check_pictograph(&p.to_pictograph()?)?,
        Document::TauReport(r) => {
            let tau = tau_sequence(&r.tau, r.fund_edges)?;
            if r.top != top_count(&tau) {
                return Err(Failure::new("summary-mismatch", "recorded top disagrees with τ"));
            }
        }
    }
    Ok(())
}

fn render(doc: &Document, depth: usize) -> Result<String, Failure> {
    match doc {
        Document::Lamination(l) => Ok(svg::render_lamination(&l.to_labelled()?)),
        Document::Spine(j) => {
            let s = j.to_spine()?;
            let panels: Vec<Panel> = s
                .levels()
                .iter()
                .take(depth)
                .enumerate()
                .map(|(n, l)| Panel {
                    caption: format!("level {n}"),
                    lamination: l,
                })
                .collect();
            Ok(svg::render_column(&panels))
        }
        Document::Pictograph(p) => {
            let p = p.to_pictograph()?;
            let panels: Vec<Panel> = p
                .rows()
                .iter()
                .filter(|r| match r.role {
                    Role::Level(n) | Role::Between(n) => (n as usize) < depth,
                    _ => true,
                })
                .map(|r| Panel {
                    caption: format!("{} h={}", role_name(r.role), r.height),
                    lamination: &r.lamination,
                })
                .collect();
            Ok(svg::render_column(&panels))
        }
        other => Err(wrong_kind("lamination, spine or pictograph", other)),
    }
}
