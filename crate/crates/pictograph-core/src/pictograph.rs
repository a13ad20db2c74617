//! Pictographs: the column of labelled laminations along the spine.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::lamination::{Angle, Label, LabelledLamination, Lamination, Rat, Site};
use crate::tree::{PolynomialTree, TreeError, TreeVertex, VertexId};

/// Which spine vertex a row describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// `F(v0)`, the top of the stored ray.
    Image,
    /// `v_n`, at height `h(v0)/d^n`.
    Level(u32),
    /// A spine vertex strictly between `v_n` and `v_{n-1}` (between `v0` and
    /// `F(v0)` for `n = 0`).
    Between(u32),
    /// The vertex at the height of the lowest critical point, when it is not
    /// already a `Level`.
    Critical,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Row {
    pub role: Role,
    pub height: Rat,
    pub lamination: LabelledLamination,
}

/// Rows in order of decreasing height.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pictograph {
    degree: u32,
    rows: Vec<Row>,
}

impl Pictograph {
    pub fn new(degree: u32, mut rows: Vec<Row>) -> Self {
        rows.sort_by_key(|r| core::cmp::Reverse(r.height));
        Pictograph { degree, rows }
    }

    /// The pictograph of every quadratic polynomial with disconnected Julia
    /// set: a circle marked `1_1` above a figure-8 whose diameter carries `0_1`.
    pub fn quadratic() -> Self {
        let top = LabelledLamination::new(
            Lamination::new(Vec::new(), vec![Angle::ZERO]),
            vec![(Label::new(1, 1), Site::Point(Angle::ZERO))],
        )
        .expect("marked circle");
        let eight = LabelledLamination::new(
            Lamination::from_fractions(&[&[(0, 1), (1, 2)]], &[]),
            vec![(Label::new(0, 1), Site::Point(Angle::ZERO))],
        )
        .expect("figure-8");
        Pictograph::new(
            2,
            vec![
                Row {
                    role: Role::Image,
                    height: Rat::from_integer(2),
                    lamination: top,
                },
                Row {
                    role: Role::Level(0),
                    height: Rat::from_integer(1),
                    lamination: eight,
                },
            ],
        )
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, role: Role) -> Option<&Row> {
        self.rows.iter().find(|r| r.role == role)
    }

    /// Number of rows strictly between `F(v0)` and `v0`, plus one: the
    /// number of fundamental edges.
    pub fn fund_edges(&self) -> usize {
        1 + self.rows.iter().filter(|r| r.role == Role::Between(0)).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PictographError {
    #[error("a pictograph needs an image row and a level-0 row")]
    MissingRow,
    #[error("degree {0} pictographs with a linear spine are not supported")]
    Degree(u32),
    #[error("row {0}: no rotation makes the lamination cover the lamination it returns to")]
    NoCover(usize),
    #[error("row {0}: the spine child does not sit at the row's height")]
    Height(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

struct Slot {
    /// Row whose lamination this vertex carries.
    row: usize,
    /// Children by gap index of that lamination.
    children: Vec<Option<VertexId>>,
    /// Set on spine vertices.
    spine: Option<usize>,
}

fn image_site(s: Site, k: i64, o: Angle, target: &Lamination) -> Option<Site> {
    match s {
        Site::Point(p) => Site::Point(p.scale(k).shift(o.value())),
        Site::Gap(w) => Site::Gap(w.scale(k).shift(o.value())),
    }
    .normalized(target)
    .ok()
}

/// Whether `t -> k t + o` sends classes onto classes (or onto a single
/// point of the target) and every label `(t, c)` onto the site of
/// `(t + shift, c)` wherever the target carries it.
fn covers(src: &LabelledLamination, dst: &LabelledLamination, k: i64, o: Angle, shift: u32) -> bool {
    let tb = dst.base();
    for c in src.base().classes() {
        let mut img: Vec<Angle> = c.iter().map(|x| x.scale(k).shift(o.value())).collect();
        img.sort();
        img.dedup();
        let ok = if img.len() == 1 {
            tb.marks().contains(&img[0]) || tb.class_of(img[0]).is_some()
        } else {
            tb.classes().contains(&img)
        };
        if !ok {
            return false;
        }
    }
    src.labels()
        .iter()
        .all(|&(l, site)| match dst.site_of(Label::new(l.time + shift, l.crit)) {
            Some(want) => image_site(site, k, o, tb) == Some(want),
            None => true,
        })
}

fn find_offset(src: &LabelledLamination, dst: &LabelledLamination, k: i64, shift: u32) -> Option<Angle> {
    let base = src.base();
    let p0 = base.points().first().copied().or(base.marks().first().copied());
    let Some(p0) = p0 else {
        return Some(Angle::ZERO);
    };
    let mut targets = dst.base().points();
    targets.extend_from_slice(dst.base().marks());
    targets.push(Angle::ZERO);
    targets
        .into_iter()
        .map(|q| Angle::from_rat(q.value() - p0.value() * k))
        .find(|&o| covers(src, dst, k, o, shift))
}

impl Pictograph {
    /// The tree of the pictograph down to `cutoff`, built from the gaps of
    /// the laminations: each gap is an edge below the vertex, of degree equal
    /// to the local degree of the cover on that gap. Off the spine a vertex
    /// carries a copy of its image's lamination.
    ///
    /// Rows below `v0` must form a linear spine of degree-2 vertices, which
    /// is every pictograph of degree 2 or 3.
    pub fn tree(&self, cutoff: Rat) -> Result<PolynomialTree, PictographError> {
        let d = self.degree;
        if !(2..=3).contains(&d) {
            return Err(PictographError::Degree(d));
        }
        let rows = &self.rows;
        let v0 = rows
            .iter()
            .position(|r| r.role == Role::Level(0))
            .ok_or(PictographError::MissingRow)?;
        if rows[0].role != Role::Image || v0 == 0 {
            return Err(PictographError::MissingRow);
        }
        let mut vs: Vec<TreeVertex> = Vec::new();
        let mut slots: Vec<Slot> = Vec::new();
        for (i, row) in rows[..=v0].iter().enumerate() {
            vs.push(TreeVertex {
                parent: i.checked_sub(1),
                children: if i < v0 { vec![i + 1] } else { Vec::new() },
                height: row.height,
                image: (i == v0).then_some(0),
                deg: d,
                edge_deg: d,
                complete: true,
            });
            slots.push(Slot {
                row: i,
                children: if i < v0 { vec![Some(i + 1)] } else { Vec::new() },
                spine: Some(i),
            });
        }
        let mut heap = BinaryHeap::from([(rows[v0].height, Reverse(v0))]);
        while let Some((_, Reverse(x))) = heap.pop() {
            let y = vs[x].image.expect("images are set at creation");
            let z_row = slots[y].row;
            // (image child, edge degree, spine row)
            let mut plan: Vec<(Option<VertexId>, u32, Option<usize>)> = Vec::new();
            if let Some(s) = slots[x].spine {
                let k = if s == v0 { d } else { 2 };
                let mut shift = 1;
                let mut z = y;
                while slots[z].spine.is_none() {
                    z = vs[z].image.expect("orbits reach the ray");
                    shift += 1;
                }
                let src = &rows[s].lamination;
                let dst = &rows[z_row].lamination;
                let o = find_offset(src, dst, k as i64, shift).ok_or(PictographError::NoCover(s))?;
                let tgaps = dst.base().gaps();
                let gaps = src.base().gaps();
                let spine_gap = if s + 1 < rows.len() {
                    if gaps.len() == 1 {
                        Some(0)
                    } else {
                        src.site_of(Label::new(0, 2))
                            .filter(|site| site.is_gap())
                            .and_then(|site| src.base().gap_containing(site.angle()))
                    }
                } else {
                    None
                };
                for (j, g) in gaps.iter().enumerate() {
                    let w = g.witness().scale(k as i64).shift(o.value());
                    let ti = tgaps
                        .iter()
                        .position(|h| h.contains(w))
                        .ok_or(PictographError::NoCover(s))?;
                    let deg = g.length() * k as i64 / tgaps[ti].length();
                    if !deg.is_integer() {
                        return Err(PictographError::NoCover(s));
                    }
                    let spine = (spine_gap == Some(j)).then_some(s + 1);
                    plan.push((slots[y].children[ti], deg.to_integer() as u32, spine));
                }
            } else {
                plan = slots[y].children.iter().map(|&c| (c, 1, None)).collect();
            }
            let mut children = Vec::with_capacity(plan.len());
            for (image, deg, spine) in plan {
                let Some(image) = image else {
                    children.push(None);
                    continue;
                };
                let h = vs[image].height / d as i64;
                if h < cutoff {
                    children.push(None);
                    continue;
                }
                if let Some(r) = spine {
                    if rows[r].height != h {
                        return Err(PictographError::Height(r));
                    }
                }
                let c = vs.len();
                vs.push(TreeVertex {
                    parent: Some(x),
                    children: Vec::new(),
                    height: h,
                    image: Some(image),
                    deg,
                    edge_deg: deg,
                    complete: true,
                });
                vs[x].children.push(c);
                slots.push(Slot {
                    row: spine.unwrap_or(slots[image].row),
                    children: Vec::new(),
                    spine,
                });
                children.push(Some(c));
                heap.push((h, Reverse(c)));
            }
            vs[x].complete = children.iter().all(Option::is_some);
            slots[x].children = children;
        }
        Ok(PolynomialTree::from_parts(d, vs, (1..=v0).rev().collect(), cutoff)?)
    }
}
