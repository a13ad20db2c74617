//! Inductive construction of abstract pictographs, and the census of cubic
//! truncated spines built on it.
//!
//! A [`BuildState`] holds the column of labelled laminations `v0, v1, ...`
//! at heights `h(v0)/d^n`, the lamination at `F(v0)`, and for every level
//! below `v0` the first-return cover that produced it. Labels `k_i` follow
//! the pictograph convention: `f^k(c_i)` lies in the gap or on the class.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::cubic::{sym, CubicError, TauSequence, TruncatedSpine};
use crate::lamination::{
    enumerate_covers, Angle, CoverConstraint, Label, LabelledLamination, LamCover, Lamination, LaminationError, Site,
};

/// Largest spine length the census accepts by default.
pub const DEFAULT_CAP: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("the fundamental cover has degree {found}, expected {expected}")]
    Degree { expected: u32, found: u32 },
    #[error("the image of the fundamental cover must have no nontrivial class")]
    ImageNotTrivial,
    #[error("the fundamental cover has no nontrivial class")]
    NoClass,
    #[error("level {0} has no gap holding undetermined critical labels")]
    NothingToExtend(usize),
    #[error("no level above {0} carries the return labels in a single gap")]
    NoReturn(usize),
    #[error("level {0} does not exist")]
    NoLevel(usize),
    #[error("placement of {label} at level {level}: {why}")]
    Placement {
        label: Label,
        level: usize,
        why: &'static str,
    },
    #[error("the cover is not among the enumerated extensions")]
    NotEnumerated,
    #[error("length {len} exceeds the cap {cap}")]
    Cap { len: u32, cap: u32 },
    #[error(transparent)]
    Lamination(#[from] LaminationError),
    #[error(transparent)]
    Cubic(#[from] CubicError),
}

/// The first-return cover behind a level below `v0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReturnRecord {
    /// Level onto which the new level maps.
    pub target: usize,
    /// Return time `k`: the level index drops by `k`.
    pub time: u32,
    pub cover: LamCover,
}

/// Outcome of the first-return search for the level below a lower end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstReturn {
    pub time: u32,
    /// The image level `n - k`.
    pub target: usize,
    /// The level `w'` just above the image level; `None` for the top.
    pub parent: Option<usize>,
    /// Gap of `w'` holding every `k_i` and a critical label.
    pub gap: Site,
    /// Critical indices `I` being extended.
    pub crit: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Placement {
    /// Put the label on a class, a marked point, or in a gap. A point site
    /// off every class adds a marked point.
    Drop { label: Label, site: Site },
    /// Put the label on a trivial lamination inserted just above the level.
    Bisect { label: Label },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// Push the labels of a level to its return image.
    Forward(usize),
    /// Copy the labels of a level into the central gap of the level above.
    Upward(usize),
    /// Place one label at a level.
    Downward(usize, Placement),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildState {
    degree: u32,
    top: LabelledLamination,
    fundamental: LamCover,
    levels: Vec<LabelledLamination>,
    returns: Vec<Option<ReturnRecord>>,
    /// Labels on trivial laminations inserted above a level.
    bisected: Vec<(usize, Label)>,
}

/// Starts a pictograph from a degree-`d` cover of a lamination without
/// classes. Critical classes receive their labels first, then critical
/// gaps, each of degree `m` taking `m - 1` consecutive indices.
pub fn init(d: u32, fundamental: &LamCover) -> Result<BuildState, BuildError> {
    if fundamental.degree != d {
        return Err(BuildError::Degree {
            expected: d,
            found: fundamental.degree,
        });
    }
    let img = fundamental.image()?;
    if !img.is_trivial() {
        return Err(BuildError::ImageNotTrivial);
    }
    let dom = &fundamental.domain;
    if dom.classes().is_empty() {
        return Err(BuildError::NoClass);
    }
    let mut labels = Vec::new();
    let mut next = 1u8;
    for c in dom.classes() {
        for _ in 1..fundamental.class_degree(c)? {
            labels.push((Label::new(0, next), Site::Point(c[0])));
            next += 1;
        }
    }
    for g in dom.gaps() {
        for _ in 1..fundamental.gap_degree(&g)? {
            labels.push((Label::new(0, next), Site::Gap(g.witness())));
            next += 1;
        }
    }
    let level0 = LabelledLamination::new(dom.with_marks(Vec::new()), labels)?;
    let mut state = BuildState {
        degree: d,
        top: LabelledLamination::unlabelled(Lamination::trivial()),
        fundamental: LamCover::new(dom.with_marks(Vec::new()), d, fundamental.offset),
        levels: vec![level0],
        returns: vec![None],
        bisected: Vec::new(),
    };
    state.push_to_top()?;
    Ok(state)
}

/// Every starting state in degree `d`, up to rotation: one per cover of a
/// circle with at most `d - 1` marked critical values.
pub fn init_states(d: u32) -> Vec<BuildState> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for marks in 1..d as i64 {
        let values: Vec<Angle> = (0..marks).map(|j| Angle::new(j, marks)).collect();
        let image = Lamination::new(Vec::new(), values);
        for cov in enumerate_covers(&image, d, &CoverConstraint::default()) {
            if cov.domain.classes().is_empty() || !seen.insert(cov.domain.canonical_form()) {
                continue;
            }
            if let Ok(s) = init(d, &LamCover::new(cov.domain.with_marks(Vec::new()), d, Angle::ZERO)) {
                out.push(s);
            }
        }
    }
    out
}

fn image_site(cov: &LamCover, site: Site, target: &Lamination) -> Option<Site> {
    match site {
        Site::Point(x) => Site::Point(cov.map(x)),
        Site::Gap(w) => Site::Gap(cov.map(w)),
    }
    .normalized(target)
    .ok()
}

impl BuildState {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn top(&self) -> &LabelledLamination {
        &self.top
    }

    pub fn levels(&self) -> &[LabelledLamination] {
        &self.levels
    }

    pub fn returns(&self) -> &[Option<ReturnRecord>] {
        &self.returns
    }

    pub fn bisected(&self) -> &[(usize, Label)] {
        &self.bisected
    }

    /// Recomputes the lamination at `F(v0)` from `v0`: marked points at the
    /// images of classes and marked points, the forward images of the labels
    /// of `v0`, and the labels of `v0` themselves in the one gap.
    fn push_to_top(&mut self) -> Result<(), BuildError> {
        let cov = &self.fundamental;
        let lvl = &self.levels[0];
        let mut marks: Vec<Angle> = lvl.base().classes().iter().map(|c| cov.map(c[0])).collect();
        marks.extend(lvl.base().marks().iter().map(|&m| cov.map(m)));
        let base = Lamination::new(Vec::new(), marks);
        let gap = Site::Gap(base.gaps()[0].witness());
        let mut labels: Vec<(Label, Site)> = Vec::new();
        let mut put = |l: Label, site: Site| match labels.iter().find(|e| e.0 == l) {
            Some(e) if e.1 != site => Err(BuildError::Placement {
                label: l,
                level: 0,
                why: "forward and upward images disagree",
            }),
            Some(_) => Ok(()),
            None => {
                labels.push((l, site));
                Ok(())
            }
        };
        for &(l, site) in lvl.labels() {
            let img = image_site(cov, site, &base).ok_or(BuildError::Placement {
                label: l,
                level: 0,
                why: "no image",
            })?;
            put(Label::new(l.time + 1, l.crit), img)?;
        }
        for &(l, _) in lvl.labels() {
            put(l, gap)?;
        }
        for &(level, l) in &self.bisected {
            if level == 0 {
                put(l, gap)?;
            }
        }
        self.top = LabelledLamination::new(base, labels)?;
        Ok(())
    }

    /// The gap of level `n` holding its `0_i` labels, with those indices.
    pub fn frontier(&self, n: usize) -> Option<(Site, Vec<u8>)> {
        let lvl = self.levels.get(n)?;
        let mut crit = Vec::new();
        let mut gap = None;
        for &(l, site) in lvl.labels() {
            if l.time == 0 && site.is_gap() && gap.is_none_or(|g| g == site) {
                gap = Some(site);
                crit.push(l.crit);
            }
        }
        gap.map(|g| (g, crit))
    }

    /// The gap of level `n` through which the spine continues.
    pub fn central_gap(&self, n: usize) -> Option<Site> {
        self.frontier(n).map(|f| f.0)
    }

    /// The first return of the level below the lower end `v_prime`.
    ///
    /// With `n = v_prime + 1` and `I` the indices of the `0_i` in the
    /// frontier gap of `v_prime`, this is the least `k >= 1` such that the
    /// vertex `w'` just above level `n - k` (the top for `n - k = 0`) carries
    /// every `k_i`, `i` in `I`, in one gap `W` that also holds a label `0_j`.
    /// Ties at the same `k` cannot occur: `W` is then the gap leading to
    /// level `n - k`.
    pub fn first_return_search(&self, v_prime: usize) -> Result<FirstReturn, BuildError> {
        if v_prime >= self.levels.len() {
            return Err(BuildError::NoLevel(v_prime));
        }
        let (_, crit) = self.frontier(v_prime).ok_or(BuildError::NothingToExtend(v_prime))?;
        let n = v_prime + 1;
        for k in 1..=n as u32 {
            let target = n - k as usize;
            let parent = if target == 0 {
                &self.top
            } else {
                &self.levels[target - 1]
            };
            let sites: Vec<Option<Site>> = crit.iter().map(|&i| parent.site_of(Label::new(k, i))).collect();
            let Some(Some(w)) = sites.first().copied() else {
                continue;
            };
            let together = w.is_gap() && sites.iter().all(|&s| s == Some(w));
            let critical = parent.labels_at(w).iter().any(|l| l.time == 0);
            if together && critical {
                return Ok(FirstReturn {
                    time: k,
                    target,
                    parent: target.checked_sub(1),
                    gap: w,
                    crit,
                });
            }
        }
        Err(BuildError::NoReturn(v_prime))
    }

    /// The gap of the image level holding every `k_i`: the branch gap of the
    /// extension. Requires those labels to have been dropped there.
    pub fn branch_gap(&self, fr: &FirstReturn) -> Result<Site, BuildError> {
        let lvl = self.levels.get(fr.target).ok_or(BuildError::NoLevel(fr.target))?;
        let mut site = None;
        for &i in &fr.crit {
            let label = Label::new(fr.time, i);
            let s = lvl.site_of(label).ok_or(BuildError::Placement {
                label,
                level: fr.target,
                why: "not yet dropped into the image level",
            })?;
            if !s.is_gap() || site.is_some_and(|t| t != s) {
                return Err(BuildError::Placement {
                    label,
                    level: fr.target,
                    why: "return labels must share one gap",
                });
            }
            site = Some(s);
        }
        site.ok_or(BuildError::NothingToExtend(fr.target))
    }

    /// Covers of degree `#I + 1` of the image level, branched over the
    /// branch gap only.
    pub fn extension_covers(&self, fr: &FirstReturn) -> Result<Vec<LamCover>, BuildError> {
        let branch = self.branch_gap(fr)?;
        let image = self.levels[fr.target].base().with_marks(Vec::new());
        let constraint = CoverConstraint {
            branch_over: Some(vec![branch]),
            ..CoverConstraint::default()
        };
        Ok(enumerate_covers(&image, fr.crit.len() as u32 + 1, &constraint))
    }

    /// Adds the level below the lower end with lamination `cover.domain`,
    /// dropping each `0_i` into its critical gap.
    pub fn extend(&self, fr: &FirstReturn, cover: LamCover) -> Result<BuildState, BuildError> {
        let key = cover.domain.canonical_form();
        if !self
            .extension_covers(fr)?
            .iter()
            .any(|c| c.domain.canonical_form() == key)
        {
            return Err(BuildError::NotEnumerated);
        }
        self.extend_with(fr, cover)
    }

    fn extend_with(&self, fr: &FirstReturn, cover: LamCover) -> Result<BuildState, BuildError> {
        let branch = self.branch_gap(fr)?;
        let image = self.levels[fr.target].base().with_marks(Vec::new());
        let img_gap = image.gap_containing(branch.angle()).ok_or(BuildError::NotEnumerated)?;
        let crit_gap = cover
            .domain
            .gaps()
            .into_iter()
            .find(|g| {
                image.gap_containing(cover.map(g.witness())) == Some(img_gap)
                    && cover.gap_degree(g).is_ok_and(|k| k > 1)
            })
            .ok_or(BuildError::NotEnumerated)?;
        let labels = fr
            .crit
            .iter()
            .map(|&i| (Label::new(0, i), Site::Gap(crit_gap.witness())))
            .collect();
        let mut next = self.clone();
        next.levels.push(LabelledLamination::new(cover.domain.clone(), labels)?);
        next.returns.push(Some(ReturnRecord {
            target: fr.target,
            time: fr.time,
            cover,
        }));
        Ok(next)
    }

    /// Sites at level `n` where `label` may go so that forward propagation
    /// lands on its image label: `Bisect` first, then drops in angle order.
    pub fn placements(&self, n: usize, label: Label) -> Vec<Placement> {
        let Some(lvl) = self.levels.get(n) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let base = lvl.base();
        let (cover, target, shift) = match self.return_of(n) {
            Some(r) => r,
            None => return out,
        };
        let want = target.site_of(Label::new(label.time + shift, label.crit));
        let consistent = |site: Site| match want {
            Some(w) => image_site(&cover, site, target.base()) == Some(w),
            None => false,
        };
        for g in base.gaps() {
            let site = Site::Gap(g.witness());
            if consistent(site) {
                out.push(Placement::Drop { label, site });
            }
        }
        if let Some(Site::Point(y)) = want {
            for x in cover.preimages(y) {
                let site = Site::Point(x);
                if image_site(&cover, site, target.base()) == want {
                    out.push(Placement::Drop { label, site });
                }
            }
        }
        out.sort();
        out.dedup();
        out.insert(0, Placement::Bisect { label });
        out
    }

    /// The cover out of level `n`, its target lamination and time shift.
    fn return_of(&self, n: usize) -> Option<(LamCover, &LabelledLamination, u32)> {
        if n == 0 {
            return Some((self.fundamental.clone(), &self.top, 1));
        }
        let r = self.returns.get(n)?.as_ref()?;
        Some((r.cover.clone(), &self.levels[r.target], r.time))
    }

    /// Whether every label at level `n` maps onto its image label, where
    /// that label is present.
    pub fn forward_consistent(&self, n: usize) -> bool {
        let Some((cover, target, shift)) = self.return_of(n) else {
            return true;
        };
        self.levels[n]
            .labels()
            .iter()
            .all(|&(l, site)| match target.site_of(Label::new(l.time + shift, l.crit)) {
                Some(w) => image_site(&cover, site, target.base()) == Some(w),
                None => true,
            })
    }

    pub fn propagate(&self, p: Propagation) -> Result<BuildState, BuildError> {
        let mut next = self.clone();
        match p {
            Propagation::Forward(n) => {
                if n >= self.levels.len() {
                    return Err(BuildError::NoLevel(n));
                }
                if n == 0 {
                    next.push_to_top()?;
                    return Ok(next);
                }
                let (cover, target, shift) = self.return_of(n).ok_or(BuildError::NoLevel(n))?;
                let r = self.returns[n].as_ref().unwrap().target;
                let mut labels = target.labels().to_vec();
                for &(l, site) in self.levels[n].labels() {
                    let img = Label::new(l.time + shift, l.crit);
                    let s = image_site(&cover, site, target.base()).ok_or(BuildError::Placement {
                        label: l,
                        level: n,
                        why: "no image site",
                    })?;
                    match target.site_of(img) {
                        Some(w) if w != s => {
                            return Err(BuildError::Placement {
                                label: l,
                                level: n,
                                why: "image label sits elsewhere",
                            })
                        }
                        Some(_) => {}
                        None => labels.push((img, s)),
                    }
                }
                next.levels[r] = LabelledLamination::new(target.base().clone(), labels)?;
            }
            Propagation::Upward(n) => {
                if n == 0 || n >= self.levels.len() {
                    return Err(BuildError::NoLevel(n));
                }
                let above = &self.levels[n - 1];
                let gap = self.central_gap(n - 1).ok_or(BuildError::NothingToExtend(n - 1))?;
                let mut labels = above.labels().to_vec();
                for &(l, _) in self.levels[n].labels() {
                    if above.site_of(l).is_none() {
                        labels.push((l, gap));
                    }
                }
                next.levels[n - 1] = LabelledLamination::new(above.base().clone(), labels)?;
            }
            Propagation::Downward(n, placement) => {
                let lvl = self.levels.get(n).ok_or(BuildError::NoLevel(n))?;
                match placement {
                    Placement::Bisect { label } => {
                        next.bisected.push((n, label));
                        next.bisected.sort();
                        if n == 0 {
                            next.push_to_top()?;
                        }
                    }
                    Placement::Drop { label, site } => {
                        if lvl.site_of(label).is_some() {
                            return Err(BuildError::Placement {
                                label,
                                level: n,
                                why: "already placed",
                            });
                        }
                        let mut base = lvl.base().clone();
                        if let Site::Point(x) = site {
                            if base.class_of(x).is_none() && !base.marks().contains(&x) {
                                let mut marks = base.marks().to_vec();
                                marks.push(x);
                                base = base.with_marks(marks);
                            }
                        }
                        let mut labels = lvl.labels().to_vec();
                        labels.push((label, site));
                        next.levels[n] = LabelledLamination::new(base, labels)?;
                        if n == 0 {
                            next.push_to_top()?;
                        }
                    }
                }
            }
        }
        Ok(next)
    }

    /// The truncated spine of a cubic state: the levels with the `0_1`
    /// label removed. Two fundamental edges when the last orbit point above
    /// `v0` was bisected.
    pub fn truncated_spine(&self) -> Result<TruncatedSpine, BuildError> {
        let fund_edges = if self.bisected.iter().any(|&(n, _)| n == 0) {
            2
        } else {
            1
        };
        let levels = self
            .levels
            .iter()
            .map(|l| {
                let labels = l.labels().iter().copied().filter(|(x, _)| x.crit == 2).collect();
                LabelledLamination::new(l.base().clone(), labels)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TruncatedSpine::new(levels, fund_edges)?)
    }
}

/// Census filters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnumOptions {
    /// Keep only spines with this τ-sequence (its edge count included).
    pub tau: Option<TauSequence>,
    /// Keep only spines with this many fundamental edges.
    pub fund_edges: Option<u8>,
    /// Length cap; [`DEFAULT_CAP`] when `None`.
    pub cap: Option<u32>,
}

/// The generic cubic start: `{0, 1/3}` with `0_1` on the class and `0_2` in
/// the long gap.
pub fn cubic_start() -> BuildState {
    let cov = LamCover::new(crate::cubic::level_zero_base(), 3, Angle::ZERO);
    init(3, &cov).expect("the cubic start is a valid cover")
}

/// Whether the levels built so far agree with `t` wherever they decide it:
/// `τ(n)` is the deepest `j < n` whose level above holds `n - j` in its
/// central gap, so `c` levels fix `τ(1..=c+1)`.
fn prefix_matches(levels: &[LabelledLamination], t: &TauSequence) -> bool {
    let central = |l: &LabelledLamination, s: u32| l.site_of(sym(s)).is_some_and(|x| Some(x) == l.site_of(sym(0)));
    let decided = (levels.len() + 1).min(t.len()) as u32;
    (1..=decided).all(|n| {
        let got = (1..n)
            .rev()
            .find(|&j| central(&levels[j as usize - 1], n - j))
            .unwrap_or(0);
        got == t.tau(n)
    })
}

/// Every inequivalent cubic truncated spine of length `len`, sorted by
/// canonical form.
///
/// Level 0 is the cubic start with symbols `1..L-1` dropped into its gaps
/// and `L` either bisected (two fundamental edges) or dropped onto the
/// curve. Each further level is an extension over the first-return gap,
/// followed by dropping every symbol of the central gap above that stays
/// within the horizon `s + n <= L`. Symbols reaching the horizon on a
/// two-edge spine sit on the intermediate circles and are bisected.
pub fn enumerate_cubic_spines(len: u32, opts: &EnumOptions) -> Result<Vec<TruncatedSpine>, BuildError> {
    let cap = opts.cap.unwrap_or(DEFAULT_CAP);
    if len > cap {
        return Err(BuildError::Cap { len, cap });
    }
    let edge_counts: Vec<u8> = match (opts.fund_edges, &opts.tau) {
        (Some(f), _) => vec![f],
        (None, Some(t)) => vec![t.fund_edges()],
        (None, None) => vec![1, 2],
    };
    if len == 0 {
        return Ok(edge_counts.iter().map(|&f| TruncatedSpine::empty(f)).collect());
    }
    let mut found = BTreeSet::new();
    for &fe in &edge_counts {
        let mut frontier = dedup(level_zero_states(len, fe)?);
        for n in 0..len {
            if let Some(t) = &opts.tau {
                frontier.retain(|st| prefix_matches(&st.levels, t));
            }
            if n + 1 == len {
                break;
            }
            let mut next = Vec::new();
            for state in &frontier {
                next.extend(children(state, len, fe)?);
            }
            frontier = dedup(next);
        }
        for state in frontier {
            found.insert(state.truncated_spine()?.canonical());
        }
    }
    let mut out: Vec<TruncatedSpine> = found.into_iter().collect();
    if let Some(t) = &opts.tau {
        out.retain(|s| &crate::cubic::tau_from_spine(s) == t);
    }
    Ok(out)
}

fn product<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn apply_all(state: &BuildState, n: usize, ps: &[Placement]) -> Result<BuildState, BuildError> {
    let mut s = state.clone();
    for &p in ps {
        s = s.propagate(Propagation::Downward(n, p))?;
    }
    Ok(s)
}

fn level_zero_states(len: u32, fe: u8) -> Result<Vec<BuildState>, BuildError> {
    let start = cubic_start();
    let base = start.levels[0].base().clone();
    let gaps: Vec<Site> = base.gaps().iter().map(|g| Site::Gap(g.witness())).collect();
    let mut options: Vec<Vec<Placement>> = (1..len)
        .map(|s| {
            gaps.iter()
                .map(|&site| Placement::Drop { label: sym(s), site })
                .collect()
        })
        .collect();
    let last = if fe == 2 {
        vec![Placement::Bisect { label: sym(len) }]
    } else {
        base.classes()
            .iter()
            .map(|c| Site::Point(c[0]))
            .chain(gaps.iter().map(|g| Site::Point(g.angle())))
            .map(|site| Placement::Drop { label: sym(len), site })
            .collect()
    };
    options.push(last);
    product(&options).iter().map(|ps| apply_all(&start, 0, ps)).collect()
}

/// Drops states whose levels agree up to rotating each level. Growth only
/// reads levels one at a time, so such states have the same descendants.
fn dedup(states: Vec<BuildState>) -> Vec<BuildState> {
    let mut seen = BTreeSet::new();
    states
        .into_iter()
        .filter(|s| {
            let key: Vec<LabelledLamination> = s.levels.iter().map(|l| l.canonical_form()).collect();
            seen.insert((key, s.bisected.clone()))
        })
        .collect()
}

fn children(state: &BuildState, len: u32, fe: u8) -> Result<Vec<BuildState>, BuildError> {
    let n = state.levels.len();
    let fr = state.first_return_search(n - 1)?;
    let central = state.central_gap(n - 1).ok_or(BuildError::NothingToExtend(n - 1))?;
    let symbols: Vec<u32> = state.levels[n - 1]
        .labels()
        .iter()
        .filter(|&&(l, site)| l.crit == 2 && l.time > 0 && site == central)
        .map(|&(l, _)| l.time)
        .filter(|&s| s as usize + n <= len as usize)
        .collect();
    let mut out = Vec::new();
    for cover in state.extension_covers(&fr)? {
        let next = state.extend_with(&fr, cover)?;
        let mut options = Vec::with_capacity(symbols.len());
        for &s in &symbols {
            let horizon = s as usize + n == len as usize;
            let opts: Vec<Placement> = next
                .placements(n, sym(s))
                .into_iter()
                .filter(|p| match p {
                    Placement::Drop { site, .. } => !horizon && site.is_gap() || horizon && fe == 1 && !site.is_gap(),
                    Placement::Bisect { .. } => horizon && fe == 2,
                })
                .collect();
            options.push(opts);
        }
        for ps in product(&options) {
            let s = apply_all(&next, n, &ps)?;
            if s.forward_consistent(n) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_start_is_unique() {
        let states = init_states(2);
        assert_eq!(states.len(), 1);
        let l0 = &states[0].levels()[0];
        assert_eq!(l0.base(), &Lamination::from_fractions(&[&[(0, 1), (1, 2)]], &[]));
        assert_eq!(l0.site_of(Label::new(0, 1)), Some(Site::Point(Angle::ZERO)));
        assert_eq!(
            states[0].top().site_of(Label::new(1, 1)),
            Some(Site::Point(Angle::ZERO))
        );
        assert!(states[0].frontier(0).is_none());
    }

    #[test]
    fn cubic_starts() {
        let states = init_states(3);
        let triple = Lamination::from_fractions(&[&[(0, 1), (1, 3), (2, 3)]], &[]);
        let z3 = states
            .iter()
            .find(|s| s.levels()[0].base().canonical_form() == triple)
            .unwrap();
        assert_eq!(z3.levels()[0].labels_at(Site::Point(Angle::ZERO)).len(), 2);
        let generic = cubic_start();
        assert_eq!(generic.frontier(0).unwrap().1, vec![2]);
        assert!(states
            .iter()
            .any(|s| s.levels()[0].base() == generic.levels()[0].base()));
    }

    #[test]
    fn first_return_from_the_start() {
        let s = cubic_start();
        let fr = s.first_return_search(0).unwrap();
        assert_eq!((fr.time, fr.target, fr.parent), (1, 0, None));
        assert_eq!(s.top().site_of(Label::new(1, 2)), Some(fr.gap));
        // 1_2 has not been dropped into v0 yet
        assert!(matches!(s.extension_covers(&fr), Err(BuildError::Placement { .. })));
    }

    #[test]
    fn first_return_of_0123() {
        // every symbol in the long gap
        let mut s = cubic_start();
        let long = s.central_gap(0).unwrap();
        for k in 1..4 {
            s = s
                .propagate(Propagation::Downward(
                    0,
                    Placement::Drop {
                        label: sym(k),
                        site: long,
                    },
                ))
                .unwrap();
        }
        let fr = s.first_return_search(0).unwrap();
        assert_eq!((fr.time, fr.target), (1, 0));
        assert_eq!(s.branch_gap(&fr), Ok(long));
        let covers = s.extension_covers(&fr).unwrap();
        assert_eq!(covers.len(), 1);
        let s1 = s.extend(&fr, covers[0].clone()).unwrap();
        let fr1 = s1.first_return_search(1).unwrap();
        assert_eq!((fr1.time, fr1.target, fr1.parent), (1, 1, Some(0)));
        // 1_2 must be dropped into level 1 before extending over it
        assert!(s1.branch_gap(&fr1).is_err());
        let drops: Vec<Placement> = s1.placements(1, sym(1));
        assert_eq!(drops[0], Placement::Bisect { label: sym(1) });
        let s1 = s1.propagate(Propagation::Downward(1, drops[1])).unwrap();
        assert!(s1.forward_consistent(1));
        assert!(s1.branch_gap(&fr1).is_ok());
        let wrong = LamCover::new(Lamination::from_fractions(&[&[(0, 1), (1, 2)]], &[]), 2, Angle::ZERO);
        assert_eq!(s.extend(&fr, wrong), Err(BuildError::NotEnumerated));
    }

    #[test]
    fn propagation_modes() {
        let mut s = cubic_start();
        let long = s.central_gap(0).unwrap();
        s = s
            .propagate(Propagation::Downward(
                0,
                Placement::Drop {
                    label: sym(1),
                    site: long,
                },
            ))
            .unwrap();
        let fr = s.first_return_search(0).unwrap();
        let cover = s.extension_covers(&fr).unwrap().remove(0);
        let s1 = s.extend(&fr, cover).unwrap();
        // forward pushes 0_2 at level 1 to 1_2 at level 0, already in place
        assert_eq!(
            s1.propagate(Propagation::Forward(1)).unwrap().levels()[0],
            s1.levels()[0]
        );
        // upward copies the level-1 labels into the central gap of level 0
        let up = s1.propagate(Propagation::Upward(1)).unwrap();
        assert_eq!(up.levels()[0].site_of(Label::new(0, 2)), Some(long));
        let b = s1
            .propagate(Propagation::Downward(1, Placement::Bisect { label: sym(2) }))
            .unwrap();
        assert_eq!(b.bisected(), &[(1, sym(2))]);
        let again = s.propagate(Propagation::Downward(
            0,
            Placement::Drop {
                label: sym(1),
                site: long,
            },
        ));
        assert!(matches!(again, Err(BuildError::Placement { .. })));
    }

    #[test]
    fn census_counts() {
        let count = |len, fe| {
            enumerate_cubic_spines(
                len,
                &EnumOptions {
                    fund_edges: Some(fe),
                    ..EnumOptions::default()
                },
            )
            .unwrap()
            .len()
        };
        assert_eq!([1, 2, 3, 4].map(|l| count(l, 2)), [1, 2, 4, 8]);
        assert_eq!([1, 2, 3].map(|l| count(l, 1)), [3, 6, 12]);
        assert_eq!(
            enumerate_cubic_spines(9, &EnumOptions::default()),
            Err(BuildError::Cap { len: 9, cap: 8 })
        );
    }

    #[test]
    fn census_is_sorted_and_filtered_by_tau() {
        let all = enumerate_cubic_spines(4, &EnumOptions::default()).unwrap();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let tau = TauSequence::new(vec![0, 1, 2, 3], 2).unwrap();
        let one = enumerate_cubic_spines(
            4,
            &EnumOptions {
                tau: Some(tau.clone()),
                ..EnumOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(crate::cubic::tau_from_spine(&one[0]), tau);
    }

    #[test]
    fn tau_filter_keeps_every_matching_spine() {
        for len in 1..=5 {
            let all = enumerate_cubic_spines(len, &EnumOptions::default()).unwrap();
            let taus: BTreeSet<TauSequence> = all.iter().map(crate::cubic::tau_from_spine).collect();
            for tau in taus {
                let opts = EnumOptions {
                    tau: Some(tau.clone()),
                    ..EnumOptions::default()
                };
                let filtered = enumerate_cubic_spines(len, &opts).unwrap();
                let expected: Vec<TruncatedSpine> = all
                    .iter()
                    .filter(|s| crate::cubic::tau_from_spine(s) == tau)
                    .cloned()
                    .collect();
                assert_eq!(filtered, expected, "τ {:?}", tau.values());
            }
        }
    }

    #[test]
    fn two_critical_extension_has_degree_three() {
        let start = init_states(4)
            .into_iter()
            .find(|s| s.frontier(0).is_some_and(|f| f.1.len() == 2))
            .unwrap();
        let (gap, crit) = start.frontier(0).unwrap();
        assert_eq!(crit, vec![2, 3]);
        let mut s = start;
        for i in [2, 3] {
            s = s
                .propagate(Propagation::Downward(
                    0,
                    Placement::Drop {
                        label: Label::new(1, i),
                        site: gap,
                    },
                ))
                .unwrap();
        }
        let fr = s.first_return_search(0).unwrap();
        assert_eq!(fr.crit, vec![2, 3]);
        let covers = s.extension_covers(&fr).unwrap();
        assert!(!covers.is_empty());
        for c in covers {
            assert_eq!(c.degree, 3);
            assert_eq!(c.critical_count(), Ok(2));
            let next = s.extend(&fr, c).unwrap();
            assert_eq!(next.frontier(1).unwrap().1, vec![2, 3]);
        }
    }
}
