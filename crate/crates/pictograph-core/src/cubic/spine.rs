use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{CubicError, TauSequence, MAX_TAU_LEN};
use crate::lamination::{gap_lifts, pullback2, Angle, Label, LabelledLamination, Lamination, Rat, Site};

/// Critical index carried by the integer symbols of a truncated spine.
pub const LOWER: u8 = 2;

/// The symbol `k`, standing for `f^k(c2)`.
pub fn sym(k: u32) -> Label {
    Label::new(k, LOWER)
}

/// The level-0 lamination `{0, 1/3}`: a short gap of degree 1 and a long
/// central gap of degree 2.
pub fn level_zero_base() -> Lamination {
    Lamination::from_fractions(&[&[(0, 1), (1, 3)]], &[])
}

const SHORT: (i64, i64) = (1, 6);
const LONG: (i64, i64) = (2, 3);

/// The laminations at heights `G(c1)/3^n`, `n = 0..L-1`, labelled by the
/// symbols `k` with `f^k(c2)` in a gap or on the curve.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruncatedSpine {
    levels: Vec<LabelledLamination>,
    fund_edges: u8,
}

impl TruncatedSpine {
    /// Checks every level against the first-return rules.
    pub fn new(levels: Vec<LabelledLamination>, fund_edges: u8) -> Result<Self, CubicError> {
        if fund_edges != 1 && fund_edges != 2 {
            return Err(CubicError::FundEdges(fund_edges));
        }
        if levels.len() > MAX_TAU_LEN {
            return Err(CubicError::TauTooLong(levels.len()));
        }
        let len = levels.len() as u32;
        for n in 0..levels.len() {
            let options = if n == 0 {
                level_zero_choices(len, fund_edges)
            } else {
                next_level_choices(&levels[..n], len, fund_edges)?
            };
            let key = levels[n].canonical_form();
            if !options.iter().any(|o| o.canonical_form() == key) {
                return Err(CubicError::BadLevel(n as u32));
            }
        }
        Ok(TruncatedSpine { levels, fund_edges })
    }

    /// The empty spine of a length-0 cubic.
    pub fn empty(fund_edges: u8) -> Self {
        TruncatedSpine {
            levels: Vec::new(),
            fund_edges,
        }
    }

    /// Length `L`.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[LabelledLamination] {
        &self.levels
    }

    pub fn fund_edges(&self) -> u8 {
        self.fund_edges
    }

    /// Every level replaced by its canonical form; equal for equivalent spines.
    pub fn canonical(&self) -> Self {
        TruncatedSpine {
            levels: self.levels.iter().map(|l| l.canonical_form()).collect(),
            fund_edges: self.fund_edges,
        }
    }

    pub fn central_gap(&self, n: usize) -> Site {
        central(&self.levels[n])
    }

    /// Whether symbol `s` labels a gap at level `n`.
    pub fn in_gap(&self, n: usize, s: u32) -> bool {
        matches!(self.levels[n].site_of(sym(s)), Some(Site::Gap(_)))
    }

    pub fn has_symbol(&self, n: usize, s: u32) -> bool {
        self.levels[n].site_of(sym(s)).is_some()
    }

    pub fn in_central_gap(&self, n: usize, s: u32) -> bool {
        self.levels[n].site_of(sym(s)) == Some(self.central_gap(n))
    }

    /// Symbols in the same gap as `s` at level `n`.
    pub fn gap_mates(&self, n: usize, s: u32) -> Vec<u32> {
        match self.levels[n].site_of(sym(s)) {
            Some(site @ Site::Gap(_)) => self.levels[n].labels_at(site).iter().map(|l| l.time).collect(),
            _ => Vec::new(),
        }
    }
}

/// A site for a symbol, with the mark it adds to the level if any.
type SiteChoice = (Site, Option<Angle>);

fn central(l: &LabelledLamination) -> Site {
    l.site_of(sym(0)).expect("symbol 0 at every level")
}

fn tau_of_prefix(prefix: &[LabelledLamination], n: usize) -> usize {
    (0..n)
        .rev()
        .find(|&j| prefix[j].site_of(sym((n - j) as u32)).is_some())
        .unwrap_or(0)
}

/// All level-0 labellings of a spine of length `len`, up to rotation.
pub fn level_zero_choices(len: u32, fund_edges: u8) -> Vec<LabelledLamination> {
    let base = level_zero_base();
    let short = Site::Gap(Angle::new(SHORT.0, SHORT.1));
    let long = Site::Gap(Angle::new(LONG.0, LONG.1));
    let free = len.saturating_sub(1) as usize;
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << free) {
        let mut labels = vec![(sym(0), long)];
        for s in 1..len {
            let site = if mask >> (s - 1) & 1 == 1 { short } else { long };
            labels.push((sym(s), site));
        }
        if fund_edges == 1 {
            for (mark, site) in [
                (
                    Some(Angle::new(SHORT.0, SHORT.1)),
                    Site::Point(Angle::new(SHORT.0, SHORT.1)),
                ),
                (
                    Some(Angle::new(LONG.0, LONG.1)),
                    Site::Point(Angle::new(LONG.0, LONG.1)),
                ),
                (None, Site::Point(Angle::ZERO)),
            ] {
                let b = base.with_marks(mark.into_iter().collect());
                let mut lab = labels.clone();
                lab.push((sym(len), site));
                out.insert(
                    LabelledLamination::new(b, lab)
                        .expect("level-0 labels valid")
                        .canonical_form(),
                );
            }
        } else {
            out.insert(
                LabelledLamination::new(base.clone(), labels)
                    .expect("level-0 labels valid")
                    .canonical_form(),
            );
        }
    }
    out.into_iter().collect()
}

/// All labelled laminations that can follow `prefix` as level `prefix.len()`,
/// canonical and without repeats.
///
/// The level is the degree-2 pullback of the level `τ(n)` lamination branched
/// over the gap holding symbol `k(n) = n - τ(n)`; each symbol lands in a lift of
/// the site of its return image.
pub fn next_level_choices(
    prefix: &[LabelledLamination],
    len: u32,
    fund_edges: u8,
) -> Result<Vec<LabelledLamination>, CubicError> {
    let n = prefix.len();
    if n == 0 {
        return Ok(level_zero_choices(len, fund_edges));
    }
    let lvl = n as u32;
    let t = tau_of_prefix(prefix, n);
    let k = (n - t) as u32;
    let parent = &prefix[t];
    let bad = || CubicError::BadLevel(lvl);
    let branch = match parent.site_of(sym(k)) {
        Some(s @ Site::Gap(_)) => s,
        _ => return Err(bad()),
    };
    let pbase = parent.base();
    let base = pullback2(pbase, branch).map_err(CubicError::Lamination)?;
    let pgaps = pbase.gaps();
    let gaps = base.gaps();
    let gap_index = |s: Site| pgaps.iter().position(|g| g.contains(s.angle()));
    let branch_idx = gap_index(branch).ok_or_else(bad)?;
    let crit_gap = gap_lifts(&base, pbase, 2, Angle::ZERO, branch_idx);
    if crit_gap.len() != 1 {
        return Err(bad());
    }
    let crit = Site::Gap(gaps[crit_gap[0]].witness());

    let above = &prefix[n - 1];
    let cen = central(above);
    // per symbol, each site with the mark it adds
    let mut options: Vec<(Label, Vec<SiteChoice>)> = Vec::new();
    for &(l, site) in above.labels() {
        if site != cen {
            continue;
        }
        let s = l.time;
        let target = || parent.site_of(sym(s + k)).ok_or_else(bad);
        if s + lvl < len {
            let target = target()?;
            let ti = match target {
                Site::Gap(_) => gap_index(target).ok_or_else(bad)?,
                Site::Point(_) => return Err(bad()),
            };
            if ti == branch_idx {
                options.push((l, vec![(crit, None)]));
            } else {
                let lifts = gap_lifts(&base, pbase, 2, Angle::ZERO, ti);
                options.push((
                    l,
                    lifts
                        .into_iter()
                        .map(|i| (Site::Gap(gaps[i].witness()), None))
                        .collect(),
                ));
            }
        } else if fund_edges == 1 && s + lvl == len {
            let y = match target()? {
                Site::Point(y) => y,
                Site::Gap(_) => return Err(bad()),
            };
            let on_class = pbase.class_of(y).is_some();
            let pre = [
                Angle::from_rat(y.value() / 2),
                Angle::from_rat(y.value() / 2 + Rat::new(1, 2)),
            ];
            options.push((
                l,
                pre.iter()
                    .map(|&x| (Site::Point(x), if on_class { None } else { Some(x) }))
                    .collect(),
            ));
        }
    }
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut labels = Vec::with_capacity(options.len());
        let mut marks = Vec::new();
        for (i, (l, opts)) in options.iter().enumerate() {
            let (site, mark) = opts[idx[i]];
            labels.push((*l, site));
            marks.extend(mark);
        }
        let lam = LabelledLamination::new(base.with_marks(marks), labels).map_err(CubicError::Lamination)?;
        out.insert(lam.canonical_form());
        let mut c = 0;
        loop {
            if c == idx.len() {
                return Ok(out.into_iter().collect());
            }
            idx[c] += 1;
            if idx[c] < options[c].1.len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// The τ-sequence of a spine: `τ(n)` is the deepest earlier level carrying the
/// symbol `n - j`; the final entry uses the levels whose central gap holds the
/// symbol `L - j - 1`.
pub fn tau_from_spine(s: &TruncatedSpine) -> TauSequence {
    let len = s.len();
    let mut values: Vec<u32> = (1..len).map(|n| tau_of_prefix(s.levels(), n) as u32).collect();
    if len > 0 {
        let last = (0..len.saturating_sub(1))
            .rev()
            .find(|&j| s.in_central_gap(j, (len - j - 1) as u32))
            .map_or(0, |j| j as u32 + 1);
        values.push(last);
    }
    TauSequence::new(values, s.fund_edges()).expect("spines yield admissible τ")
}

/// Pairs `(k(i), t(i))`, `i = 1..=L`, describing the underlying tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeCode {
    pub pairs: Vec<(u32, u32)>,
}

/// The tree code: `k(i)` counts symbols `j < i` that are minimal in their gap
/// at level `i - j - 1`; `t(i) = i - j(i) + m(i)` where `j(i)` is the least
/// non-minimal such symbol (or `i`) and `m(i)` the least symbol in its gap.
pub fn tree_code(s: &TruncatedSpine) -> TreeCode {
    let len = s.len() as u32;
    let mut pairs = Vec::with_capacity(len as usize);
    for i in 1..=len {
        let mut k = 0;
        let mut first: Option<(u32, u32)> = None;
        for j in 0..i {
            let level = (i - j - 1) as usize;
            if !s.in_gap(level, j) {
                continue;
            }
            let least = s.gap_mates(level, j).into_iter().min().unwrap();
            if least == j {
                k += 1;
            } else if first.is_none() {
                first = Some((j, least));
            }
        }
        let (j, m) = first.unwrap_or((i, 0));
        pairs.push((k, i - j + m));
    }
    TreeCode { pairs }
}
