use alloc::vec;
use alloc::vec::Vec;

use super::{sym, CubicError, TruncatedSpine};
use crate::lamination::{pullback2, Angle, Label, LabelledLamination, Lamination, Rat, Site};
use crate::pictograph::{Pictograph, Role, Row};

fn third_power(n: usize) -> Rat {
    Rat::new(1, 3i64.pow(n as u32))
}

fn marked_circle(label: Label) -> LabelledLamination {
    LabelledLamination::new(
        Lamination::new(Vec::new(), vec![Angle::ZERO]),
        vec![(label, Site::Point(Angle::ZERO))],
    )
    .expect("marked circle")
}

fn circle_with_gap_label(label: Label) -> LabelledLamination {
    LabelledLamination::new(Lamination::trivial(), vec![(label, Site::Gap(Angle::new(1, 2)))]).expect("labelled circle")
}

/// The full cubic pictograph with `h(v0) = 1`.
///
/// Two fundamental edges put `G(c2) = 2/3^L`: a circle sits above every
/// level (at `2/3^n`) and the figure-8 at `G(c2)` carries `0_2`. The circle
/// below level `n` is marked by `(L-n-1)_2` when that symbol shares the
/// central gap with `0_2`. One fundamental edge puts `c2` at `1/3^L`, on the
/// degree-2 cover of the deepest level `n` marked by the point `(L-n)_2`,
/// branched over that point.
pub fn pictograph_from_truncated(s: &TruncatedSpine) -> Result<Pictograph, CubicError> {
    if s.is_empty() {
        return Err(CubicError::EmptySpine);
    }
    let len = s.len();
    let levels = s.levels();
    let two_edges = s.fund_edges() == 2;
    let mut rows = Vec::with_capacity(2 * len + 2);

    // F(v0): the circle with the pushed-forward marks and labels
    let zero = &levels[0];
    let push = |x: Angle| x.scale(3);
    let class0 = zero.base().classes()[0][0];
    let mut marks = vec![push(class0)];
    let mut labels = vec![(Label::new(1, 1), Site::Point(push(class0)))];
    for &(l, site) in zero.labels() {
        let img = match site {
            Site::Point(p) => {
                marks.push(push(p));
                Site::Point(push(p))
            }
            Site::Gap(_) => Site::Gap(Angle::new(1, 2)),
        };
        labels.push((Label::new(l.time + 1, l.crit), img));
    }
    let top = LabelledLamination::new(Lamination::new(Vec::new(), marks), labels)?;
    rows.push(Row {
        role: Role::Image,
        height: Rat::from_integer(3),
        lamination: top,
    });
    if two_edges {
        rows.push(Row {
            role: Role::Between(0),
            height: Rat::from_integer(2),
            lamination: marked_circle(sym(len as u32)),
        });
    }
    for (n, lam) in levels.iter().enumerate() {
        let lam = if n == 0 {
            let mut labels = lam.labels().to_vec();
            labels.push((Label::new(0, 1), Site::Point(class0)));
            LabelledLamination::new(lam.base().clone(), labels)?
        } else {
            lam.clone()
        };
        rows.push(Row {
            role: Role::Level(n as u32),
            height: third_power(n),
            lamination: lam,
        });
        if two_edges && n + 1 < len {
            let k = (len - n - 1) as u32;
            let circle = if !s.in_central_gap(n, k) {
                LabelledLamination::unlabelled(Lamination::trivial())
            } else if s.has_symbol(n + 1, k) {
                circle_with_gap_label(sym(k))
            } else {
                marked_circle(sym(k))
            };
            rows.push(Row {
                role: Role::Between(n as u32 + 1),
                height: third_power(n + 1) * 2,
                lamination: circle,
            });
        }
    }
    let critical = if two_edges {
        LabelledLamination::new(
            Lamination::from_fractions(&[&[(0, 1), (1, 2)]], &[]),
            vec![(sym(0), Site::Point(Angle::ZERO))],
        )?
    } else {
        let (n, p) = (0..len)
            .rev()
            .find_map(|n| match levels[n].site_of(sym((len - n) as u32)) {
                Some(Site::Point(p)) => Some((n, p)),
                _ => None,
            })
            .ok_or(CubicError::BadLevel(len as u32 - 1))?;
        let base = pullback2(levels[n].base(), Site::Point(p))?;
        let lift = Angle::from_rat(p.value() / 2);
        LabelledLamination::new(base, vec![(sym(0), Site::Point(lift))])?
    };
    rows.push(Row {
        role: Role::Critical,
        height: third_power(len) * if two_edges { 2 } else { 1 },
        lamination: critical,
    });
    Ok(Pictograph::new(3, rows))
}

/// The levels of a cubic pictograph, with the `0_1` label removed.
pub fn truncate(p: &Pictograph) -> Result<TruncatedSpine, CubicError> {
    let mut levels = Vec::new();
    for row in p.rows() {
        if let Role::Level(_) = row.role {
            let labels = row
                .lamination
                .labels()
                .iter()
                .copied()
                .filter(|(l, _)| l.crit == 2)
                .collect();
            levels.push(LabelledLamination::new(row.lamination.base().clone(), labels)?);
        }
    }
    TruncatedSpine::new(levels, p.fund_edges() as u8)
}
