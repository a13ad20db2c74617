//! The pruned census against an exhaustive search: every degree-2 cover of
//! every earlier level, every placement of every symbol, filtered only by
//! the labelling rules.

use std::collections::BTreeSet;

use pictograph_core::builder::{enumerate_cubic_spines, EnumOptions};
use pictograph_core::cubic::{level_zero_base, sym};
use pictograph_core::lamination::{
    enumerate_covers, Angle, CoverConstraint, LabelledLamination, LamCover, Lamination, Site,
};

type Column = Vec<LabelledLamination>;

fn product<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    options.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.iter()
            .flat_map(|p| {
                opts.iter().map(move |o| {
                    let mut q = p.clone();
                    q.push(o.clone());
                    q
                })
            })
            .collect()
    })
}

fn gap_sites(l: &Lamination) -> Vec<Site> {
    l.gaps().iter().map(|g| Site::Gap(g.witness())).collect()
}

fn build(base: &Lamination, placed: &[(u32, Site)]) -> Option<LabelledLamination> {
    let mut marks = Vec::new();
    for &(_, s) in placed {
        if let Site::Point(x) = s {
            if base.class_of(x).is_none() && !marks.contains(&x) {
                marks.push(x);
            }
        }
    }
    let labels = placed.iter().map(|&(k, s)| (sym(k), s)).collect();
    LabelledLamination::new(base.with_marks(marks), labels).ok()
}

fn level_zero(len: u32, fe: u8) -> Vec<LabelledLamination> {
    let base = level_zero_base();
    let fund = LamCover::new(base.clone(), 3, Angle::ZERO);
    let gaps = gap_sites(&base);
    let mut options: Vec<Vec<(u32, Site)>> = Vec::new();
    // symbol 0 in a gap of local degree 2
    options.push(
        base.gaps()
            .iter()
            .filter(|g| fund.gap_degree(g) == Ok(2))
            .map(|g| (0, Site::Gap(g.witness())))
            .collect(),
    );
    for s in 1..len {
        options.push(gaps.iter().map(|&g| (s, g)).collect());
    }
    if fe == 1 {
        let mut pts: Vec<Site> = base.points().into_iter().map(Site::Point).collect();
        pts.extend(gaps.iter().map(|g| Site::Point(g.angle())));
        options.push(pts.into_iter().map(|p| (len, p)).collect());
    }
    product(&options).iter().filter_map(|p| build(&base, p)).collect()
}

fn carries(l: &LabelledLamination, s: u32) -> bool {
    l.site_of(sym(s)).is_some()
}

fn next_levels(col: &Column, len: u32, fe: u8) -> Vec<LabelledLamination> {
    let n = col.len();
    let above = &col[n - 1];
    let central = above.site_of(sym(0)).unwrap();
    let inside: Vec<u32> = above
        .labels()
        .iter()
        .filter(|&&(l, s)| l.time > 0 && s == central)
        .map(|&(l, _)| l.time)
        .collect();
    let mut out = Vec::new();
    for j in 0..n {
        let target = &col[j];
        let k = (n - j) as u32;
        // first return: no deeper level carries its return symbol
        if !carries(target, k) || (j + 1..n).any(|i| carries(&col[i], (n - i) as u32)) {
            continue;
        }
        let image = target.base().with_marks(Vec::new());
        for cov in enumerate_covers(&image, 2, &CoverConstraint::default()) {
            let dom = &cov.domain;
            let gaps = gap_sites(dom);
            let mut pts: Vec<Site> = dom.points().into_iter().map(Site::Point).collect();
            for y in image.points().iter().chain(target.base().marks()) {
                pts.extend(cov.preimages(*y).into_iter().map(Site::Point));
            }
            let mut options: Vec<Vec<(u32, Site)>> = vec![gaps.iter().map(|&g| (0, g)).collect()];
            for &s in &inside {
                let reach = s + n as u32;
                if reach < len {
                    options.push(gaps.iter().map(|&g| (s, g)).collect());
                } else if reach == len && fe == 1 {
                    options.push(pts.iter().map(|&p| (s, p)).collect());
                }
            }
            for placed in product(&options) {
                let Some(lvl) = build(dom, &placed) else { continue };
                let crit = dom.gaps().into_iter().find(|g| cov.gap_degree(g) == Ok(2));
                let Some(crit) = crit else { continue };
                // symbol 0 in the critical gap, which lies over the return symbol
                if lvl.site_of(sym(0)) != Some(Site::Gap(crit.witness())) {
                    continue;
                }
                let over = Site::Gap(cov.map(crit.witness())).normalized(target.base()).ok();
                if over != target.site_of(sym(k)) {
                    continue;
                }
                let forward = lvl.labels().iter().all(|&(l, site)| {
                    let img = match site {
                        Site::Point(x) => Site::Point(cov.map(x)),
                        Site::Gap(w) => Site::Gap(cov.map(w)),
                    };
                    img.normalized(target.base()).ok() == target.site_of(sym(l.time + k))
                });
                if forward {
                    out.push(lvl);
                }
            }
        }
    }
    out
}

fn brute_force(len: u32, fe: u8) -> BTreeSet<Column> {
    let mut cols: Vec<Column> = level_zero(len, fe).into_iter().map(|l| vec![l]).collect();
    for _ in 1..len {
        cols = cols
            .iter()
            .flat_map(|c| {
                next_levels(c, len, fe).into_iter().map(move |l| {
                    let mut d = c.clone();
                    d.push(l);
                    d
                })
            })
            .collect();
    }
    cols.into_iter()
        .map(|c| c.iter().map(|l| l.canonical_form()).collect())
        .collect()
}

#[test]
fn pruned_census_matches_brute_force() {
    for fe in [1u8, 2] {
        for len in 1..=3 {
            let opts = EnumOptions {
                fund_edges: Some(fe),
                ..EnumOptions::default()
            };
            let pruned: BTreeSet<Column> = enumerate_cubic_spines(len, &opts)
                .unwrap()
                .iter()
                .map(|s| s.levels().to_vec())
                .collect();
            let brute = brute_force(len, fe);
            assert!(!brute.is_empty());
            assert_eq!(pruned, brute, "length {len}, {fe} fundamental edges");
        }
    }
}
