//! Finite laminations on the circle `R/Z` and their branched covers.
//!
//! A lamination is a finite set of pairwise disjoint, pairwise unlinked finite
//! classes of angles. Only nontrivial classes are stored; marked points are
//! singleton classes that carry labels. A branched cover of degree `d` is the
//! affine map `t -> d*t + c` restricted to a domain lamination that sends
//! classes onto classes and gap closures onto gap closures.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar used throughout the crate.
pub type Rat = Ratio<i64>;

/// A point of the circle of circumference one, stored in `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle(Rat);

impl Angle {
    pub const ZERO: Angle = Angle(Ratio::new_raw(0, 1));

    /// Builds `num/den` reduced modulo one.
    pub fn new(num: i64, den: i64) -> Self {
        Self::from_rat(Rat::new(num, den))
    }

    pub fn from_rat(r: Rat) -> Self {
        Angle(r - r.floor())
    }

    pub fn value(self) -> Rat {
        self.0
    }

    /// Rotation by `t`.
    pub fn shift(self, t: Rat) -> Self {
        Self::from_rat(self.0 + t)
    }

    pub fn scale(self, k: i64) -> Self {
        Self::from_rat(self.0 * k)
    }

    /// Counterclockwise distance from `from` to `self`, in `[0, 1)`.
    pub fn dist_from(self, from: Angle) -> Rat {
        let d = self.0 - from.0;
        if d.is_negative() {
            d + Rat::one()
        } else {
            d
        }
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Length of the counterclockwise open arc `(a, b)`; `a == b` is the full circle.
pub fn arc_len(a: Angle, b: Angle) -> Rat {
    if a == b {
        Rat::one()
    } else {
        b.dist_from(a)
    }
}

/// Whether `x` lies in the open counterclockwise arc `(a, b)`.
pub fn in_open_arc(x: Angle, a: Angle, b: Angle) -> bool {
    if a == b {
        return x != a;
    }
    let t = x.dist_from(a);
    !t.is_zero() && t < b.dist_from(a)
}

/// A reason a [`Lamination`] fails validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Class `i` has fewer than two distinct points.
    Degenerate(usize),
    /// Classes `i` and `j` share a point.
    Overlap(usize, usize),
    /// Classes `i` and `j` cross.
    Linked(usize, usize),
    /// Marked point `i` lies on a nontrivial class.
    MarkOnClass(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Degenerate(i) => write!(f, "class {i} has fewer than two points"),
            Violation::Overlap(i, j) => write!(f, "classes {i} and {j} are not disjoint"),
            Violation::Linked(i, j) => write!(f, "classes {i} and {j} are not unlinked"),
            Violation::MarkOnClass(i) => write!(f, "marked point {i} lies on a class"),
        }
    }
}

/// Errors raised by lamination and cover operations.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LaminationError {
    #[error("invalid lamination: {0}")]
    Invalid(Violation),
    #[error("cover degree must be at least 1")]
    ZeroDegree,
    #[error("preimage of image class point {0} is not a class point of the domain")]
    NotSaturated(Angle),
    #[error("gap arc starting at {0} does not map into a single image gap")]
    GapNotClosed(Angle),
    #[error("non-integral local degree")]
    NonIntegralDegree,
    #[error("critical count {found} differs from degree - 1 = {expected}")]
    RiemannHurwitz { found: u32, expected: u32 },
    #[error("angle {0} is not in any gap")]
    NotInGap(Angle),
    #[error("angle {0} is not a class point or marked point")]
    NotAPoint(Angle),
}

/// A gap: a maximal region of the disk unlinked with every class, recorded by
/// the open boundary arcs it meets, in counterclockwise order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gap {
    arcs: Vec<(Angle, Angle)>,
}

impl Gap {
    pub fn arcs(&self) -> &[(Angle, Angle)] {
        &self.arcs
    }

    pub fn length(&self) -> Rat {
        self.arcs.iter().map(|&(a, b)| arc_len(a, b)).sum()
    }

    /// The gap of a lamination without classes contains every angle.
    pub fn contains(&self, x: Angle) -> bool {
        if let [(a, b)] = self.arcs[..] {
            if a == b {
                return true;
            }
        }
        self.arcs.iter().any(|&(a, b)| in_open_arc(x, a, b))
    }

    /// A canonical interior point: the midpoint of the first arc.
    pub fn witness(&self) -> Angle {
        let (a, b) = self.arcs[0];
        a.shift(arc_len(a, b) / 2)
    }
}

/// A finite lamination with optional marked points.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lamination {
    classes: Vec<Vec<Angle>>,
    marks: Vec<Angle>,
}

impl Lamination {
    pub fn trivial() -> Self {
        Self::default()
    }

    /// Normalizes ordering; does not validate.
    pub fn new(classes: Vec<Vec<Angle>>, marks: Vec<Angle>) -> Self {
        let mut classes: Vec<Vec<Angle>> = classes
            .into_iter()
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        classes.sort();
        let mut marks = marks;
        marks.sort();
        marks.dedup();
        Lamination { classes, marks }
    }

    /// Convenience constructor from `(num, den)` pairs.
    pub fn from_fractions(classes: &[&[(i64, i64)]], marks: &[(i64, i64)]) -> Self {
        Self::new(
            classes
                .iter()
                .map(|c| c.iter().map(|&(n, d)| Angle::new(n, d)).collect())
                .collect(),
            marks.iter().map(|&(n, d)| Angle::new(n, d)).collect(),
        )
    }

    pub fn classes(&self) -> &[Vec<Angle>] {
        &self.classes
    }

    pub fn marks(&self) -> &[Angle] {
        &self.marks
    }

    pub fn with_marks(&self, marks: Vec<Angle>) -> Self {
        Self::new(self.classes.clone(), marks)
    }

    pub fn is_trivial(&self) -> bool {
        self.classes.is_empty()
    }

    /// All violated invariants; empty iff valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, c) in self.classes.iter().enumerate() {
            let mut s = c.clone();
            s.dedup();
            if s.len() < 2 {
                out.push(Violation::Degenerate(i));
            }
        }
        for i in 0..self.classes.len() {
            for j in i + 1..self.classes.len() {
                let (a, b) = (&self.classes[i], &self.classes[j]);
                if a.iter().any(|x| b.contains(x)) {
                    out.push(Violation::Overlap(i, j));
                } else if linked(a, b) {
                    out.push(Violation::Linked(i, j));
                }
            }
        }
        for (i, m) in self.marks.iter().enumerate() {
            if self.classes.iter().any(|c| c.contains(m)) {
                out.push(Violation::MarkOnClass(i));
            }
        }
        out
    }

    pub fn validate(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn check(&self) -> Result<(), LaminationError> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(LaminationError::Invalid(v)),
        }
    }

    /// Sorted points of the nontrivial classes.
    pub fn points(&self) -> Vec<Angle> {
        let mut p: Vec<Angle> = self.classes.iter().flatten().copied().collect();
        p.sort();
        p
    }

    pub fn class_of(&self, x: Angle) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&x))
    }

    /// The gaps, each starting from its arc of least start angle, sorted.
    pub fn gaps(&self) -> Vec<Gap> {
        let pts = self.points();
        if pts.is_empty() {
            return vec![Gap {
                arcs: vec![(Angle::ZERO, Angle::ZERO)],
            }];
        }
        let n = pts.len();
        let mut seen = vec![false; n];
        let mut gaps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut arcs = Vec::new();
            let mut i = start;
            loop {
                seen[i] = true;
                let end = pts[(i + 1) % n];
                arcs.push((pts[i], end));
                let class = &self.classes[self.class_of(end).expect("endpoint in class")];
                let pos = class.iter().position(|&x| x == end).unwrap();
                let next = class[(pos + class.len() - 1) % class.len()];
                i = pts.iter().position(|&x| x == next).unwrap();
                if i == start {
                    break;
                }
            }
            gaps.push(Gap { arcs });
        }
        gaps.sort();
        gaps
    }

    /// Index into [`Lamination::gaps`] of the gap containing `x`.
    pub fn gap_containing(&self, x: Angle) -> Option<usize> {
        self.gaps().iter().position(|g| g.contains(x))
    }

    pub fn rotate(&self, t: Rat) -> Self {
        Self::new(
            self.classes
                .iter()
                .map(|c| c.iter().map(|x| x.shift(t)).collect())
                .collect(),
            self.marks.iter().map(|x| x.shift(t)).collect(),
        )
    }

    /// Rotations that bring some class point (or, failing that, some marked
    /// point) to zero.
    pub fn normalizing_rotations(&self) -> Vec<Rat> {
        let mut base = self.points();
        if base.is_empty() {
            base = self.marks.clone();
        }
        if base.is_empty() {
            return vec![Rat::zero()];
        }
        base.iter().map(|p| -p.value()).collect()
    }

    /// The lexicographically least rotation among those putting a point at 0.
    pub fn canonical_form(&self) -> Self {
        self.normalizing_rotations()
            .into_iter()
            .map(|t| self.rotate(t))
            .min()
            .unwrap()
    }

    /// Least common denominator of all stored angles.
    pub fn denominator(&self) -> i64 {
        self.classes
            .iter()
            .flatten()
            .chain(self.marks.iter())
            .fold(1, |acc, x| acc.lcm(x.value().denom()))
    }
}

fn linked(a: &[Angle], b: &[Angle]) -> bool {
    // `a` is sorted; every point of `b` must fall in the same complementary arc.
    let arc_index = |x: Angle| {
        let n = a.len();
        (0..n).find(|&i| in_open_arc(x, a[i], a[(i + 1) % n])).unwrap_or(n)
    };
    let first = arc_index(b[0]);
    b.iter().any(|&x| arc_index(x) != first)
}

/// A branched cover `t -> degree*t + offset` of laminations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LamCover {
    pub domain: Lamination,
    pub degree: u32,
    pub offset: Angle,
}

impl LamCover {
    pub fn new(domain: Lamination, degree: u32, offset: Angle) -> Self {
        LamCover { domain, degree, offset }
    }

    pub fn map(&self, x: Angle) -> Angle {
        x.scale(self.degree as i64).shift(self.offset.value())
    }

    /// Preimages of `y` under the affine circle map.
    pub fn preimages(&self, y: Angle) -> Vec<Angle> {
        let d = self.degree as i64;
        (0..d)
            .map(|j| Angle::from_rat((y.value() - self.offset.value() + j) / d))
            .collect()
    }

    fn raw_image(&self) -> Lamination {
        let mut sets: Vec<BTreeSet<Angle>> = self
            .domain
            .classes
            .iter()
            .map(|c| c.iter().map(|&x| self.map(x)).collect())
            .collect();
        // merge overlapping images
        let mut merged: Vec<BTreeSet<Angle>> = Vec::new();
        while let Some(mut s) = sets.pop() {
            let mut changed = true;
            while changed {
                changed = false;
                let mut i = 0;
                while i < sets.len() {
                    if !sets[i].is_disjoint(&s) {
                        s.extend(sets.swap_remove(i));
                        changed = true;
                    } else {
                        i += 1;
                    }
                }
            }
            merged.push(s);
        }
        Lamination::new(
            merged
                .into_iter()
                .filter(|s| s.len() > 1)
                .map(|s| s.into_iter().collect())
                .collect(),
            self.domain.marks.iter().map(|&x| self.map(x)).collect(),
        )
    }

    /// The image lamination, after checking that the map is a branched cover.
    pub fn image(&self) -> Result<Lamination, LaminationError> {
        if self.degree == 0 {
            return Err(LaminationError::ZeroDegree);
        }
        self.domain.check()?;
        let img = self.raw_image();
        img.check()?;
        let dom_pts = self.domain.points();
        for y in img.points() {
            for x in self.preimages(y) {
                if dom_pts.binary_search(&x).is_err() {
                    return Err(LaminationError::NotSaturated(y));
                }
            }
        }
        let img_pts = img.points();
        for g in self.domain.gaps() {
            for &(a, b) in g.arcs() {
                let y0 = self.map(a);
                let len = arc_len(a, b) * self.degree as i64;
                for &q in &img_pts {
                    let t = q.dist_from(y0);
                    if (!t.is_zero() && t < len) || (t.is_zero() && len > Rat::one()) {
                        return Err(LaminationError::GapNotClosed(a));
                    }
                }
            }
        }
        let cc = self.critical_count_on(&img)?;
        if cc != self.degree - 1 {
            return Err(LaminationError::RiemannHurwitz {
                found: cc,
                expected: self.degree - 1,
            });
        }
        Ok(img)
    }

    fn gap_degree_on(&self, img: &Lamination, g: &Gap) -> Result<u32, LaminationError> {
        let w = self.map(g.witness());
        let ig = img
            .gaps()
            .into_iter()
            .find(|h| h.contains(w))
            .ok_or(LaminationError::NotInGap(w))?;
        let r = g.length() * self.degree as i64 / ig.length();
        if !r.is_integer() || !r.is_positive() {
            return Err(LaminationError::NonIntegralDegree);
        }
        Ok(r.to_integer() as u32)
    }

    fn class_degree_on(&self, img: &Lamination, a: &[Angle]) -> Result<u32, LaminationError> {
        let y = self.map(a[0]);
        let size = img.class_of(y).map_or(1, |i| img.classes[i].len());
        if !a.len().is_multiple_of(size) {
            return Err(LaminationError::NonIntegralDegree);
        }
        Ok((a.len() / size) as u32)
    }

    fn critical_count_on(&self, img: &Lamination) -> Result<u32, LaminationError> {
        let mut total = 0;
        for c in &self.domain.classes {
            total += self.class_degree_on(img, c)? - 1;
        }
        for g in self.domain.gaps() {
            total += self.gap_degree_on(img, &g)? - 1;
        }
        Ok(total)
    }

    /// `degree * |G| / |image gap|`.
    pub fn gap_degree(&self, g: &Gap) -> Result<u32, LaminationError> {
        self.gap_degree_on(&self.raw_image(), g)
    }

    /// `#A / #image class`.
    pub fn class_degree(&self, a: &[Angle]) -> Result<u32, LaminationError> {
        self.class_degree_on(&self.raw_image(), a)
    }

    /// Sum of `deg - 1` over classes and gaps.
    pub fn critical_count(&self) -> Result<u32, LaminationError> {
        self.critical_count_on(&self.raw_image())
    }

    /// Image sites receiving a critical class or critical gap.
    pub fn critical_values(&self) -> Result<Vec<Site>, LaminationError> {
        let img = self.raw_image();
        let mut out = Vec::new();
        for c in &self.domain.classes {
            if self.class_degree_on(&img, c)? > 1 {
                out.push(Site::Point(self.map(c[0])).normalized(&img)?);
            }
        }
        for g in self.domain.gaps() {
            if self.gap_degree_on(&img, &g)? > 1 {
                out.push(Site::Gap(self.map(g.witness())).normalized(&img)?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Where a label sits: on the class through a point, or in the gap through a
/// witness angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Point(Angle),
    Gap(Angle),
}

impl Site {
    /// Replaces the representative by the canonical one for `lam`: the least
    /// point of the class, or the witness of the gap.
    pub fn normalized(self, lam: &Lamination) -> Result<Site, LaminationError> {
        match self {
            Site::Point(x) => match lam.class_of(x) {
                Some(i) => Ok(Site::Point(lam.classes[i][0])),
                None => Ok(Site::Point(x)),
            },
            Site::Gap(w) => lam
                .gaps()
                .into_iter()
                .find(|g| g.contains(w))
                .map(|g| Site::Gap(g.witness()))
                .ok_or(LaminationError::NotInGap(w)),
        }
    }

    pub fn rotate(self, t: Rat) -> Site {
        match self {
            Site::Point(x) => Site::Point(x.shift(t)),
            Site::Gap(w) => Site::Gap(w.shift(t)),
        }
    }

    pub fn angle(self) -> Angle {
        match self {
            Site::Point(x) | Site::Gap(x) => x,
        }
    }

    pub fn is_gap(self) -> bool {
        matches!(self, Site::Gap(_))
    }
}

/// A label symbol `time_crit`: the `time`-th iterate of critical point `crit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub time: u32,
    pub crit: u8,
}

impl Label {
    pub fn new(time: u32, crit: u8) -> Self {
        Label { time, crit }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.time, self.crit)
    }
}

/// A lamination with labels attached to classes, marked points or gaps.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledLamination {
    base: Lamination,
    labels: Vec<(Label, Site)>,
}

impl LabelledLamination {
    /// Validates the base and every site, normalizing representatives.
    pub fn new(base: Lamination, labels: Vec<(Label, Site)>) -> Result<Self, LaminationError> {
        base.check()?;
        let mut out = Vec::with_capacity(labels.len());
        for (l, s) in labels {
            if let Site::Point(x) = s {
                if base.class_of(x).is_none() && !base.marks.contains(&x) {
                    return Err(LaminationError::NotAPoint(x));
                }
            }
            out.push((l, s.normalized(&base)?));
        }
        out.sort();
        out.dedup_by_key(|e| e.0);
        Ok(LabelledLamination { base, labels: out })
    }

    pub fn unlabelled(base: Lamination) -> Self {
        LabelledLamination {
            base,
            labels: Vec::new(),
        }
    }

    pub fn base(&self) -> &Lamination {
        &self.base
    }

    pub fn labels(&self) -> &[(Label, Site)] {
        &self.labels
    }

    pub fn site_of(&self, l: Label) -> Option<Site> {
        self.labels.iter().find(|e| e.0 == l).map(|e| e.1)
    }

    pub fn labels_at(&self, s: Site) -> Vec<Label> {
        let s = s.normalized(&self.base).ok();
        self.labels.iter().filter(|e| Some(e.1) == s).map(|e| e.0).collect()
    }

    pub fn rotate(&self, t: Rat) -> Self {
        let base = self.base.rotate(t);
        let mut labels: Vec<(Label, Site)> = self
            .labels
            .iter()
            .map(|&(l, s)| (l, s.rotate(t).normalized(&base).expect("rotation keeps sites")))
            .collect();
        labels.sort();
        LabelledLamination { base, labels }
    }

    pub fn canonical_form(&self) -> Self {
        self.base
            .normalizing_rotations()
            .into_iter()
            .map(|t| self.rotate(t))
            .min()
            .unwrap()
    }

    /// Order of the group of rotations preserving classes, marks and labels.
    /// A trivial lamination without marks has every rotation as a symmetry;
    /// `bound` then supplies the answer (default 1).
    pub fn symmetry_order(&self, bound: Option<u64>) -> u64 {
        let mut pts = self.base.points();
        if pts.is_empty() {
            pts = self.base.marks.clone();
        }
        if pts.is_empty() {
            return bound.unwrap_or(1);
        }
        let p0 = pts[0];
        pts.iter().filter(|&&p| self.rotate(p.dist_from(p0)) == *self).count() as u64
    }

    /// Rotations (as fractions of a turn) in the symmetry group.
    pub fn symmetries(&self) -> Vec<Rat> {
        let k = self.symmetry_order(None) as i64;
        (0..k).map(|j| Rat::new(j, k)).collect()
    }
}

/// `k / gcd(k, d)`: the symmetry order pushed forward by a degree `d` cover.
pub fn pushforward_symmetry(k: u64, d: u64) -> u64 {
    k / k.gcd(&d)
}

/// Requirements on the critical structure of enumerated covers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverConstraint {
    /// Exact number of critical domain classes, if given.
    pub critical_classes: Option<usize>,
    /// Exact set of image sites that must receive critical points, if given.
    pub branch_over: Option<Vec<Site>>,
    /// Unmarked image points over which domain classes may be built.
    pub extra_values: Vec<Angle>,
}

/// All covers of `image` of the given degree, offset zero, up to rotation of
/// the domain, satisfying `constraint`.
pub fn enumerate_covers(image: &Lamination, degree: u32, constraint: &CoverConstraint) -> Vec<LamCover> {
    let d = degree as i64;
    let mut fibers: Vec<Vec<Angle>> = image.classes.clone();
    for &m in image.marks.iter().chain(constraint.extra_values.iter()) {
        if image.class_of(m).is_none() && !fibers.iter().any(|f| f == &vec![m]) {
            fibers.push(vec![m]);
        }
    }
    if fibers.is_empty() {
        fibers.push(vec![Angle::ZERO]);
    }
    let probe = LamCover::new(Lamination::trivial(), degree, Angle::ZERO);
    let budget = d - 1;
    // per fiber: (classes, critical points used), keeping internally unlinked ones
    let options: Vec<Vec<Choice>> = fibers
        .iter()
        .map(|f| {
            let pts: Vec<Angle> = f.iter().flat_map(|&y| probe.preimages(y)).collect();
            balanced_partitions(&pts, f, d)
                .into_iter()
                .filter_map(|blocks| {
                    let crit: i64 = blocks.iter().map(|b| b.len() as i64 / f.len() as i64 - 1).sum();
                    let classes: Vec<Vec<Angle>> = blocks.into_iter().filter(|b| b.len() > 1).collect();
                    let ok = crit <= budget
                        && (0..classes.len())
                            .all(|i| (i + 1..classes.len()).all(|j| !linked(&classes[i], &classes[j])));
                    ok.then_some((classes, crit))
                })
                .collect()
        })
        .collect();
    let wanted_branch = constraint.branch_over.as_ref().map(|b| {
        let mut v: Vec<Site> = b.iter().filter_map(|s| s.normalized(image).ok()).collect();
        v.sort();
        v.dedup();
        v
    });
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    /// Classes to add over one image class, with the budget they use.
    type Choice = (Vec<Vec<Angle>>, i64);
    struct Search<'a> {
        options: &'a [Vec<Choice>],
        budget: i64,
        chosen: Vec<Vec<Angle>>,
    }
    fn dfs(s: &mut Search, i: usize, used: i64, emit: &mut dyn FnMut(&[Vec<Angle>])) {
        if i == s.options.len() {
            emit(&s.chosen);
            return;
        }
        for (classes, crit) in &s.options[i] {
            if used + crit > s.budget {
                continue;
            }
            if classes.iter().any(|c| s.chosen.iter().any(|e| linked(c, e))) {
                continue;
            }
            let before = s.chosen.len();
            s.chosen.extend(classes.iter().cloned());
            dfs(s, i + 1, used + crit, emit);
            s.chosen.truncate(before);
        }
    }
    let mut search = Search {
        options: &options,
        budget,
        chosen: Vec::new(),
    };
    dfs(&mut search, 0, 0, &mut |classes| {
        let domain = Lamination::new(classes.to_vec(), Vec::new());
        if !domain.validate() {
            return;
        }
        let cov = LamCover::new(domain, degree, Angle::ZERO);
        if let Ok(img) = cov.image() {
            if img.classes == image.classes && accepts(&cov, &img, constraint, wanted_branch.as_deref()) {
                let key = cov.domain.canonical_form();
                if seen.insert(key) {
                    out.push(cov);
                }
            }
        }
    });
    out
}

fn accepts(cov: &LamCover, img: &Lamination, c: &CoverConstraint, branch: Option<&[Site]>) -> bool {
    if let Some(n) = c.critical_classes {
        let crit = cov
            .domain
            .classes
            .iter()
            .filter(|a| cov.class_degree_on(img, a).is_ok_and(|k| k > 1))
            .count();
        if crit != n {
            return false;
        }
    }
    if let Some(b) = branch {
        match cov.critical_values() {
            Ok(v) => v == b,
            Err(_) => false,
        }
    } else {
        true
    }
}

/// Set partitions of `pts` (the fiber over `target`) whose blocks each cover
/// every target point equally often.
fn balanced_partitions(pts: &[Angle], target: &[Angle], d: i64) -> Vec<Vec<Vec<Angle>>> {
    let img = |x: Angle| x.scale(d);
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<Angle>> = Vec::new();
    fn rec(
        i: usize,
        pts: &[Angle],
        blocks: &mut Vec<Vec<Angle>>,
        out: &mut Vec<Vec<Vec<Angle>>>,
        ok: &dyn Fn(&[Angle]) -> bool,
    ) {
        if i == pts.len() {
            if blocks.iter().all(|b| ok(b)) {
                out.push(blocks.clone());
            }
            return;
        }
        for j in 0..blocks.len() {
            blocks[j].push(pts[i]);
            rec(i + 1, pts, blocks, out, ok);
            blocks[j].pop();
        }
        blocks.push(vec![pts[i]]);
        rec(i + 1, pts, blocks, out, ok);
        blocks.pop();
    }
    let ok = |b: &[Angle]| {
        if !b.len().is_multiple_of(target.len()) {
            return false;
        }
        let m = b.len() / target.len();
        target.iter().all(|&y| b.iter().filter(|&&x| img(x) == y).count() == m)
    };
    rec(0, pts, &mut blocks, &mut out, &ok);
    out
}

/// The degree-2 cover of `base` (offset zero) whose critical point lies over
/// `branch`: a gap witness, or a class point or marked point.
///
/// Every class lifts to two classes separated by the diameter over `branch`;
/// when branching over a class its two lifts fuse.
pub fn pullback2(base: &Lamination, branch: Site) -> Result<Lamination, LaminationError> {
    let p = match branch.normalized(base)? {
        Site::Gap(w) => w,
        Site::Point(x) => x,
    };
    let lo = Angle::from_rat(p.value() / 2);
    let hi = lo.shift(Rat::new(1, 2));
    let lift = |a: Angle| {
        [
            Angle::from_rat(a.value() / 2),
            Angle::from_rat(a.value() / 2 + Rat::new(1, 2)),
        ]
    };
    let mut classes = Vec::new();
    let fused = match branch {
        Site::Point(x) => base.class_of(x).or(if base.marks.contains(&x) {
            Some(usize::MAX)
        } else {
            None
        }),
        Site::Gap(_) => None,
    };
    if fused == Some(usize::MAX) {
        classes.push(vec![lo, hi]);
    }
    for (i, c) in base.classes.iter().enumerate() {
        let all: Vec<Angle> = c.iter().flat_map(|&a| lift(a)).collect();
        if fused == Some(i) {
            classes.push(all);
            continue;
        }
        let (inside, outside): (Vec<Angle>, Vec<Angle>) = all.into_iter().partition(|&x| in_open_arc(x, lo, hi));
        classes.push(inside);
        classes.push(outside);
    }
    let lam = Lamination::new(classes, Vec::new());
    lam.check()?;
    Ok(lam)
}

/// Indices of the gaps of `domain` that `t -> d*t + offset` maps into gap
/// `target` of `image`.
pub fn gap_lifts(domain: &Lamination, image: &Lamination, degree: u32, offset: Angle, target: usize) -> Vec<usize> {
    let ig = &image.gaps()[target];
    domain
        .gaps()
        .iter()
        .enumerate()
        .filter(|(_, g)| ig.contains(g.witness().scale(degree as i64).shift(offset.value())))
        .map(|(i, _)| i)
        .collect()
}
