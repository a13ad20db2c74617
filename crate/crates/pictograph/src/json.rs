//! Version-1 JSON documents.
//!
//! Every file is an object with `"version": "v1"` and a `"kind"` tag.
//! Angles are integers over the enclosing lamination's `den`; other
//! rationals are strings such as `"3/2"`.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use pictograph_core::cubic::{CubicError, TreeCode, TruncatedSpine};
use pictograph_core::lamination::{Angle, Label, LabelledLamination, Lamination, LaminationError, Rat, Site};
use pictograph_core::pictograph::{Pictograph, Role, Row};
use pictograph_core::tree::{PolynomialTree, TreeError, TreeVertex};
use pictograph_core::twistlat::{ConjugacyReport, SpineDescriptor, TopCount, TwistLattice, VertexOrbit};

pub const VERSION: &str = "v1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0:?}")]
    Version(String),
    #[error("bad rational {0:?}")]
    Rational(String),
    #[error("den must be positive")]
    Denominator,
    #[error("vertex {index} is listed with id {id}")]
    VertexId { index: usize, id: usize },
    #[error("unknown row role {0:?}")]
    Role(String),
    #[error(transparent)]
    Lamination(#[from] LaminationError),
    #[error(transparent)]
    Cubic(#[from] CubicError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

pub fn rat_to_string(r: Rat) -> String {
    r.to_string()
}

pub fn parse_rat(s: &str) -> Result<Rat, FormatError> {
    let r: Rat = s.trim().parse().map_err(|_| FormatError::Rational(s.into()))?;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaminationJson {
    pub den: i64,
    pub classes: Vec<Vec<i64>>,
    #[serde(default)]
    pub marks: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Point,
    Gap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelJson {
    pub time: u32,
    pub crit: u8,
    pub site: SiteKind,
    /// Numerator of the class point, marked point or gap witness.
    pub at: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledLaminationJson {
    #[serde(flatten)]
    pub lamination: LaminationJson,
    #[serde(default)]
    pub labels: Vec<LabelJson>,
}

fn numer(a: Angle, den: i64) -> i64 {
    let v = a.value();
    v.numer() * (den / v.denom())
}

fn common_den<'a>(angles: impl Iterator<Item = &'a Angle>) -> i64 {
    angles.fold(1, |acc, a| acc.lcm(a.value().denom()))
}

impl LaminationJson {
    fn with_den(l: &Lamination, den: i64) -> Self {
        LaminationJson {
            den,
            classes: l
                .classes()
                .iter()
                .map(|c| c.iter().map(|&a| numer(a, den)).collect())
                .collect(),
            marks: l.marks().iter().map(|&a| numer(a, den)).collect(),
        }
    }

    fn angle(&self, n: i64) -> Result<Angle, FormatError> {
        if self.den <= 0 {
            return Err(FormatError::Denominator);
        }
        Ok(Angle::new(n, self.den))
    }

    /// The lamination as written, without checking the invariants.
    pub fn to_lamination(&self) -> Result<Lamination, FormatError> {
        let classes = self
            .classes
            .iter()
            .map(|c| c.iter().map(|&n| self.angle(n)).collect())
            .collect::<Result<Vec<Vec<Angle>>, _>>()?;
        let marks = self.marks.iter().map(|&n| self.angle(n)).collect::<Result<_, _>>()?;
        Ok(Lamination::new(classes, marks))
    }
}

impl From<&Lamination> for LaminationJson {
    fn from(l: &Lamination) -> Self {
        let den = common_den(l.classes().iter().flatten().chain(l.marks()));
        LaminationJson::with_den(l, den)
    }
}

impl From<&LabelledLamination> for LabelledLaminationJson {
    fn from(l: &LabelledLamination) -> Self {
        let base = l.base();
        let site_angles: Vec<Angle> = l.labels().iter().map(|&(_, s)| s.angle()).collect();
        let den = common_den(
            base.classes()
                .iter()
                .flatten()
                .chain(base.marks())
                .chain(site_angles.iter()),
        );
        LabelledLaminationJson {
            lamination: LaminationJson::with_den(base, den),
            labels: l
                .labels()
                .iter()
                .map(|&(lab, s)| LabelJson {
                    time: lab.time,
                    crit: lab.crit,
                    site: if s.is_gap() { SiteKind::Gap } else { SiteKind::Point },
                    at: numer(s.angle(), den),
                })
                .collect(),
        }
    }
}

impl LabelledLaminationJson {
    pub fn to_labelled(&self) -> Result<LabelledLamination, FormatError> {
        let base = self.lamination.to_lamination()?;
        let labels = self
            .labels
            .iter()
            .map(|l| {
                let a = self.lamination.angle(l.at)?;
                let site = match l.site {
                    SiteKind::Point => Site::Point(a),
                    SiteKind::Gap => Site::Gap(a),
                };
                Ok((Label::new(l.time, l.crit), site))
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(LabelledLamination::new(base, labels)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineJson {
    pub fund_edges: u8,
    pub levels: Vec<LabelledLaminationJson>,
    /// Informational; checked by `validate` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_code: Option<Vec<(u32, u32)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<u64>,
}

impl SpineJson {
    pub fn from_spine(s: &TruncatedSpine) -> Self {
        SpineJson {
            fund_edges: s.fund_edges(),
            levels: s.levels().iter().map(LabelledLaminationJson::from).collect(),
            tau: None,
            tree_code: None,
            top: None,
        }
    }

    pub fn with_summary(mut self, tau: &[u32], code: &TreeCode, top: u64) -> Self {
        self.tau = Some(tau.to_vec());
        self.tree_code = Some(code.pairs.clone());
        self.top = Some(top);
        self
    }

    /// Parses the levels and checks them against the first-return rules.
    pub fn to_spine(&self) -> Result<TruncatedSpine, FormatError> {
        let levels = self
            .levels
            .iter()
            .map(LabelledLaminationJson::to_labelled)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TruncatedSpine::new(levels, self.fund_edges)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexOrbitJson {
    pub orbit_len: u64,
    pub degree: u64,
    pub symmetry: u64,
    pub weight: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorJson {
    pub degree: u64,
    pub fund_symmetries: Vec<u64>,
    pub levels: Vec<Vec<VertexOrbitJson>>,
    #[serde(default)]
    pub open_ended: bool,
}

impl From<&SpineDescriptor> for DescriptorJson {
    fn from(d: &SpineDescriptor) -> Self {
        DescriptorJson {
            degree: d.degree,
            fund_symmetries: d.fund_symmetries.clone(),
            levels: d
                .levels
                .iter()
                .map(|lvl| {
                    lvl.iter()
                        .map(|v| VertexOrbitJson {
                            orbit_len: v.orbit_len,
                            degree: v.degree,
                            symmetry: v.symmetry,
                            weight: v.weight.iter().map(|&w| rat_to_string(w)).collect(),
                        })
                        .collect()
                })
                .collect(),
            open_ended: d.open_ended,
        }
    }
}

impl DescriptorJson {
    /// The descriptor as written; `SpineDescriptor::validate` is left to the
    /// caller.
    pub fn to_descriptor(&self) -> Result<SpineDescriptor, FormatError> {
        let levels = self
            .levels
            .iter()
            .map(|lvl| {
                lvl.iter()
                    .map(|v| {
                        Ok(VertexOrbit {
                            orbit_len: v.orbit_len,
                            degree: v.degree,
                            symmetry: v.symmetry,
                            weight: v.weight.iter().map(|w| parse_rat(w)).collect::<Result<_, _>>()?,
                        })
                    })
                    .collect::<Result<Vec<_>, FormatError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SpineDescriptor {
            degree: self.degree,
            fund_symmetries: self.fund_symmetries.clone(),
            levels,
            open_ended: self.open_ended,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub rank: usize,
    pub den: i64,
    /// HNF generators, generator `j` supported on coordinates `0..=j`.
    pub basis: Vec<Vec<i64>>,
    pub display: String,
}

impl From<&TwistLattice> for LatticeJson {
    fn from(l: &TwistLattice) -> Self {
        LatticeJson {
            rank: l.rank(),
            den: l.denominator(),
            basis: l.basis().to_vec(),
            display: l.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroupJson {
    pub aut: u64,
    pub count: u64,
    pub lattice: LatticeJson,
}

/// Integer-keyed maps as JSON objects. Inside the envelope the document is
/// buffered before it is typed, and buffered keys stay strings.
mod int_keys {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<u64, u64>, s: S) -> Result<S::Ok, S::Error> {
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, u64>, D::Error> {
        BTreeMap::<String, u64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| match k.parse() {
                Ok(k) => Ok((k, v)),
                Err(_) => Err(D::Error::custom(format!("key {k:?} is not an integer"))),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReportJson {
    pub level: usize,
    pub class_count: u64,
    #[serde(with = "int_keys")]
    pub aut_profile: BTreeMap<u64, u64>,
    pub classes: Vec<ClassGroupJson>,
    pub top: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopJson {
    Count(u64),
    /// Always `"infinite"`.
    Word(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportJson {
    pub base: LatticeJson,
    pub per_level: Vec<LevelReportJson>,
    pub top: TopJson,
}

impl From<&ConjugacyReport> for ReportJson {
    fn from(r: &ConjugacyReport) -> Self {
        ReportJson {
            base: LatticeJson::from(&r.base),
            per_level: r
                .per_level
                .iter()
                .enumerate()
                .map(|(i, l)| LevelReportJson {
                    level: i,
                    class_count: l.class_count,
                    aut_profile: l.aut_profile.clone(),
                    classes: l
                        .groups
                        .iter()
                        .map(|g| ClassGroupJson {
                            aut: g.aut,
                            count: g.count,
                            lattice: LatticeJson::from(&g.lattice),
                        })
                        .collect(),
                    top: l.top,
                })
                .collect(),
            top: match r.top {
                TopCount::Finite(n) => TopJson::Count(n),
                TopCount::Infinite => TopJson::Word("infinite".into()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeVertexJson {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub height: String,
    /// `F(v)`; absent only at the top of the stored ray.
    pub image: Option<usize>,
    pub deg: u32,
    /// Degree of the edge to the parent.
    pub edge_deg: u32,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub degree: u32,
    pub cutoff: String,
    pub fundamental: Vec<usize>,
    pub vertices: Vec<TreeVertexJson>,
}

impl From<&PolynomialTree> for TreeJson {
    fn from(t: &PolynomialTree) -> Self {
        TreeJson {
            degree: t.degree(),
            cutoff: rat_to_string(t.cutoff()),
            fundamental: t.fundamental().to_vec(),
            vertices: t
                .vertices()
                .iter()
                .enumerate()
                .map(|(id, v)| TreeVertexJson {
                    id,
                    parent: v.parent,
                    children: v.children.clone(),
                    height: rat_to_string(v.height),
                    image: v.image,
                    deg: v.deg,
                    edge_deg: v.edge_deg,
                    complete: v.complete,
                })
                .collect(),
        }
    }
}

impl TreeJson {
    /// The same tree with every height multiplied by `h`.
    pub fn scaled(mut self, h: Rat) -> Self {
        let scale =
            |s: &mut String| *s = rat_to_string(parse_rat(s).expect("heights are written by rat_to_string") * h);
        scale(&mut self.cutoff);
        for v in &mut self.vertices {
            scale(&mut v.height);
        }
        self
    }

    pub fn to_tree(&self) -> Result<PolynomialTree, FormatError> {
        let mut vs = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(FormatError::VertexId { index: i, id: v.id });
            }
            vs.push(TreeVertex {
                parent: v.parent,
                children: v.children.clone(),
                height: parse_rat(&v.height)?,
                image: v.image,
                deg: v.deg,
                edge_deg: v.edge_deg,
                complete: v.complete,
            });
        }
        Ok(PolynomialTree::from_parts(
            self.degree,
            vs,
            self.fundamental.clone(),
            parse_rat(&self.cutoff)?,
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowJson {
    /// `image`, `level-n`, `between-n` or `critical`.
    pub role: String,
    pub height: String,
    pub lamination: LabelledLaminationJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PictographJson {
    pub degree: u32,
    pub rows: Vec<RowJson>,
}

pub fn role_name(r: Role) -> String {
    match r {
        Role::Image => "image".into(),
        Role::Level(n) => format!("level-{n}"),
        Role::Between(n) => format!("between-{n}"),
        Role::Critical => "critical".into(),
    }
}

pub fn parse_role(s: &str) -> Result<Role, FormatError> {
    let bad = || FormatError::Role(s.into());
    match s {
        "image" => Ok(Role::Image),
        "critical" => Ok(Role::Critical),
        _ => {
            let (head, n) = s.rsplit_once('-').ok_or_else(bad)?;
            let n: u32 = n.parse().map_err(|_| bad())?;
            match head {
                "level" => Ok(Role::Level(n)),
                "between" => Ok(Role::Between(n)),
                _ => Err(bad()),
            }
        }
    }
}

impl From<&Pictograph> for PictographJson {
    fn from(p: &Pictograph) -> Self {
        PictographJson {
            degree: p.degree(),
            rows: p
                .rows()
                .iter()
                .map(|r| RowJson {
                    role: role_name(r.role),
                    height: rat_to_string(r.height),
                    lamination: LabelledLaminationJson::from(&r.lamination),
                })
                .collect(),
        }
    }
}

impl PictographJson {
    pub fn to_pictograph(&self) -> Result<Pictograph, FormatError> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                Ok(Row {
                    role: parse_role(&r.role)?,
                    height: parse_rat(&r.height)?,
                    lamination: r.lamination.to_labelled()?,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(Pictograph::new(self.degree, rows))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedLevelJson {
    pub level: u64,
    pub modulus: String,
    pub twist: u64,
}

/// Output of `analyze-tau` and `spine-top`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauReportJson {
    pub tau: Vec<u32>,
    pub fund_edges: u8,
    /// Sentinel level 0 first.
    pub marked_levels: Vec<u32>,
    pub relative_moduli: Vec<String>,
    pub marked: Vec<MarkedLevelJson>,
    pub twist_periods: Vec<u64>,
    pub top: u64,
    /// Lattice induction on the descriptor of one spine with this τ, for two
    /// fundamental edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Document {
    Lamination(LabelledLaminationJson),
    Spine(SpineJson),
    Descriptor(DescriptorJson),
    Report(ReportJson),
    Tree(TreeJson),
    Pictograph(PictographJson),
    TauReport(TauReportJson),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub version: String,
    #[serde(flatten)]
    pub doc: Document,
}

impl Envelope {
    pub fn new(doc: Document) -> Self {
        Envelope {
            version: VERSION.into(),
            doc,
        }
    }
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Lamination(_) => "lamination",
            Document::Spine(_) => "spine",
            Document::Descriptor(_) => "descriptor",
            Document::Report(_) => "report",
            Document::Tree(_) => "tree",
            Document::Pictograph(_) => "pictograph",
            Document::TauReport(_) => "tau-report",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope::new(self.clone())).expect("documents serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&Envelope::new(self.clone())).expect("documents serialize")
    }

    pub fn from_json(s: &str) -> Result<Document, FormatError> {
        let env: Envelope = serde_json::from_str(s)?;
        if env.version != VERSION {
            return Err(FormatError::Version(env.version));
        }
        Ok(env.doc)
    }
}
