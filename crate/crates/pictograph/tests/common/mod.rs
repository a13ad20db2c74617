//! Property checks shared by the `properties` and `acceptance` targets. Each
//! runs its own proptest runner and reports the first failure as a string.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_integer::Integer;
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use pictograph::json::{Document, LabelledLaminationJson, PictographJson, SpineJson, TreeJson};
use pictograph_core::builder::{enumerate_cubic_spines, EnumOptions};
use pictograph_core::cubic::{
    cubic_twist_periods, lower_orbit_hits, marked_data, pictograph_from_truncated, relative_moduli, spine_descriptor,
    tableau, tau_from_spine, top_count, truncate, TauSequence, TruncatedSpine,
};
use pictograph_core::lamination::{
    enumerate_covers, Angle, CoverConstraint, Label, LabelledLamination, Lamination, Rat, Site,
};
use pictograph_core::tree::{child_weight_sum, expand_from_spine, spine_and_return, PolynomialTree};
use pictograph_core::twistlat::{analyze, lattice_index, SpineDescriptor, TopCount, VertexOrbit};

pub const CASES: u32 = 500;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// Every cubic spine of length `1..=5`, both edge counts.
pub fn small_spines() -> &'static [TruncatedSpine] {
    static CELL: OnceLock<Vec<TruncatedSpine>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut out = Vec::new();
        for len in 1..=5 {
            out.extend(enumerate_cubic_spines(len, &EnumOptions::default()).expect("census below the cap"));
        }
        out
    })
}

pub fn two_edge_spines() -> Vec<&'static TruncatedSpine> {
    small_spines().iter().filter(|s| s.fund_edges() == 2).collect()
}

/// A valid lamination on the `den`-th roots, grown by adding whichever
/// candidate classes keep it unlinked.
fn lamination_strategy(max_den: i64) -> impl Strategy<Value = Lamination> {
    (2..=max_den)
        .prop_flat_map(|den| {
            let class = proptest::collection::btree_set(0..den, 2..=3);
            (
                Just(den),
                proptest::collection::vec(class, 0..4),
                proptest::collection::vec(0..den, 0..3),
            )
        })
        .prop_map(|(den, candidates, marks)| {
            let mut classes: Vec<Vec<Angle>> = Vec::new();
            for c in candidates {
                let mut trial = classes.clone();
                trial.push(c.iter().map(|&n| Angle::new(n, den)).collect());
                if Lamination::new(trial.clone(), Vec::new()).validate() {
                    classes = trial;
                }
            }
            let base = Lamination::new(classes, Vec::new());
            let marks = marks
                .into_iter()
                .map(|n| Angle::new(n, den))
                .filter(|&a| base.class_of(a).is_none())
                .collect();
            base.with_marks(marks)
        })
}

fn labelled_strategy() -> impl Strategy<Value = LabelledLamination> {
    (
        lamination_strategy(8),
        proptest::collection::vec((0u32..4, 1u8..3, any::<prop::sample::Index>(), any::<bool>()), 0..4),
    )
        .prop_map(|(base, picks)| {
            let points = base.points();
            let gaps = base.gaps();
            let labels = picks
                .into_iter()
                .map(|(t, c, i, on_point)| {
                    let site = if on_point && !points.is_empty() {
                        Site::Point(*i.get(&points))
                    } else {
                        Site::Gap(i.get(&gaps).witness())
                    };
                    (Label::new(t, c), site)
                })
                .collect();
            LabelledLamination::new(base, labels).expect("sites are points and gap witnesses")
        })
}

/// Riemann–Hurwitz on every cover of a random image, with local degrees
/// recomputed from arc lengths and class sizes.
pub fn riemann_hurwitz(cases: u32) -> Result<(), String> {
    let strat = (lamination_strategy(6), 2u32..=3);
    report(runner(cases).run(&strat, |(image, degree)| {
        let image_gaps = image.gaps();
        for cov in enumerate_covers(&image, degree, &CoverConstraint::default()) {
            let d = degree as i64;
            prop_assert_eq!(cov.critical_count(), Ok(degree - 1));
            let mut excess = Rat::from_integer(0);
            for g in cov.domain.gaps() {
                let target = image_gaps
                    .iter()
                    .find(|h| h.contains(cov.map(g.witness())))
                    .ok_or_else(|| TestCaseError::fail("gap maps outside every image gap"))?;
                excess += g.length() * d / target.length() - 1;
            }
            for c in cov.domain.classes() {
                let mut img: Vec<Angle> = c.iter().map(|&x| cov.map(x)).collect();
                img.sort();
                img.dedup();
                excess += r(c.len() as i64, img.len() as i64) - 1;
            }
            prop_assert_eq!(excess, Rat::from_integer(d - 1));
        }
        Ok(())
    }))
}

pub fn canonical_rotation(cases: u32) -> Result<(), String> {
    let strat = (labelled_strategy(), 0i64..24, 1i64..=24);
    report(runner(cases).run(&strat, |(lam, a, b)| {
        let canon = lam.canonical_form();
        prop_assert_eq!(&lam.rotate(r(a, b)).canonical_form(), &canon);
        prop_assert_eq!(&canon.canonical_form(), &canon);
        Ok(())
    }))
}

/// Descriptors with trivial automorphisms whose twists always move a
/// gluing to a gluing: each weight lies in `(1/d_v) Z`, and the symmetry
/// divides the degree.
fn descriptor_strategy() -> impl Strategy<Value = SpineDescriptor> {
    let vertex = |n: usize| {
        (2u64..=4).prop_flat_map(move |deg| {
            let divisors: Vec<u64> = (1..=deg).filter(|k| deg % k == 0).collect();
            (
                Just(deg),
                select(divisors),
                proptest::collection::vec(0..2 * deg as i64, n),
            )
                .prop_map(move |(degree, symmetry, nums)| VertexOrbit {
                    orbit_len: 1,
                    degree,
                    symmetry,
                    weight: nums.into_iter().map(|a| r(a, degree as i64)).collect(),
                })
        })
    };
    (1usize..=2, 4u64..=6).prop_flat_map(move |(n, degree)| {
        proptest::collection::vec(proptest::collection::vec(vertex(n), 1..=2), 1..=4).prop_map(move |levels| {
            SpineDescriptor {
                degree,
                fund_symmetries: vec![1; n],
                levels,
                open_ended: false,
            }
        })
    })
}

fn unit(n: usize, j: usize, a: i64) -> Vec<Rat> {
    (0..n).map(|i| Rat::from_integer(if i == j { a } else { 0 })).collect()
}

/// Each level's lattices sit with finite index inside the previous level's
/// and contain `d_j e_j`, `d_j` the lcm of the weight denominators so far;
/// class counts never drop and every `Top(D, i)` is an integer.
pub fn lattice_chain(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&descriptor_strategy(), |desc| {
        let rep = analyze(&desc, desc.levels.len()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let n = desc.fund_count();
        let mut dj = vec![1i64; n];
        for (i, level) in rep.per_level.iter().enumerate().skip(1) {
            for v in &desc.levels[i - 1] {
                for (j, w) in v.weight.iter().enumerate() {
                    dj[j] = dj[j].lcm(w.denom());
                }
            }
            prop_assert!(level.class_count >= rep.per_level[i - 1].class_count);
            let mut sum = Rat::from_integer(0);
            for g in &level.groups {
                let parent_ok = rep.per_level[i - 1]
                    .groups
                    .iter()
                    .any(|p| lattice_index(&g.lattice, &p.lattice).is_ok());
                prop_assert!(parent_ok, "level {} lattice {} is in no parent", i, g.lattice);
                for (j, &d) in dj.iter().enumerate() {
                    prop_assert!(
                        g.lattice.contains(&unit(n, j, d)),
                        "{} misses {}e{}",
                        g.lattice,
                        d,
                        j + 1
                    );
                }
                let idx = lattice_index(&g.lattice, &rep.base).map_err(|e| TestCaseError::fail(e.to_string()))?;
                sum += r(g.count as i64, idx as i64);
            }
            prop_assert!(sum.is_integer());
            prop_assert_eq!(sum.to_integer() as u64, level.top);
        }
        Ok(())
    }))
}

/// An admissible τ: `τ(n) < n` and `τ(n) <= τ(n-1) + 1`.
fn tau_strategy(max_len: usize) -> impl Strategy<Value = TauSequence> {
    (
        proptest::collection::vec(any::<prop::sample::Index>(), 1..=max_len),
        1u8..=2,
    )
        .prop_map(|(picks, fe)| {
            let mut values: Vec<u32> = Vec::with_capacity(picks.len());
            for (i, p) in picks.iter().enumerate() {
                let n = i as u32 + 1;
                let hi = if n == 1 { 0 } else { (values[i - 1] + 1).min(n - 1) };
                values.push(p.index(hi as usize + 1) as u32);
            }
            TauSequence::new(values, fe).expect("constructed admissible")
        })
}

/// τ of every spine of length `1..=6`, both edge counts, without repeats.
pub fn realized_taus() -> &'static [TauSequence] {
    static CELL: OnceLock<Vec<TauSequence>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut out: Vec<TauSequence> = small_spines().iter().map(tau_from_spine).collect();
        for s in enumerate_cubic_spines(6, &EnumOptions::default()).expect("census below the cap") {
            out.push(tau_from_spine(&s));
        }
        out.sort();
        out.dedup();
        out
    })
}

/// `T_{l_j} / T_{l_{j-1}}` is 1 or 2, and Top is the largest `2^j / T_{l_j}`.
/// Only realized τ qualify: the two admissibility rules alone allow
/// `(0,1,2,3,2)` with two edges, where T jumps from 1 to 4.
pub fn twist_doubling(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&select(realized_taus()), |tau| {
        let data = marked_data(&tau);
        let mut prev = 1u64;
        let mut best = 1u64;
        for (j, m) in data.iter().enumerate() {
            let t = prev.max(m.twist);
            prop_assert!(t == prev || t == 2 * prev, "T jumps from {} to {}", prev, t);
            best = best.max((1u64 << j) / t);
            prev = t;
        }
        prop_assert_eq!(top_count(&tau), best);
        Ok(())
    }))
}

fn cubic_twist_case(s: &TruncatedSpine) -> Result<(), TestCaseError> {
    let tau = tau_from_spine(s);
    let desc = spine_descriptor(s).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let rep = analyze(&desc, desc.levels.len()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(rep.top, TopCount::Finite(top_count(&tau)));
    let periods = cubic_twist_periods(&tau);
    let hits = lower_orbit_hits(s);
    for n in 1..s.len() {
        let groups = &rep.per_level[2 * n].groups;
        let lat = &groups[0].lattice;
        prop_assert!(groups.iter().all(|g| &g.lattice == lat));
        let idx = lattice_index(lat, &rep.base).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(idx % (1 << hits[n - 1]), 0);
        prop_assert_eq!(periods[n], idx >> hits[n - 1], "level {} of {:?}", n, tau.values());
    }
    Ok(())
}

/// `T_n = [TP_0 : TP_{2n}] / 2^{J(n)}` on two-edge spines, and the lattice
/// count agrees with the τ formula. Every spine is checked once, then
/// `cases` samples run through the runner.
pub fn cubic_twists(cases: u32) -> Result<(), String> {
    let spines = two_edge_spines();
    for s in &spines {
        cubic_twist_case(s).map_err(|e| format!("{e} at τ {:?}", tau_from_spine(s).values()))?;
    }
    report(runner(cases).run(&select(spines), cubic_twist_case))
}

fn tree_of(s: &TruncatedSpine) -> PolynomialTree {
    let p = pictograph_from_truncated(s).expect("non-empty spine");
    p.tree(r(1, 3i64.pow(s.len() as u32)))
        .expect("cubic pictographs have trees")
}

/// Spine → pictograph → spine, spine → JSON → spine and pictograph → JSON →
/// pictograph are identities.
pub fn spine_round_trips(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&select(small_spines()), |s| {
        let s = &s;
        let p = pictograph_from_truncated(s).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let back = truncate(&p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back.canonical(), s);
        let text = Document::Spine(SpineJson::from_spine(s)).to_json();
        let Ok(Document::Spine(j)) = Document::from_json(&text) else {
            return Err(TestCaseError::fail("spine JSON did not parse back"));
        };
        prop_assert_eq!(&j.to_spine().map_err(|e| TestCaseError::fail(e.to_string()))?, s);
        let text = Document::Pictograph(PictographJson::from(&p)).to_json();
        let Ok(Document::Pictograph(pj)) = Document::from_json(&text) else {
            return Err(TestCaseError::fail("pictograph JSON did not parse back"));
        };
        prop_assert_eq!(pj.to_pictograph().map_err(|e| TestCaseError::fail(e.to_string()))?, p);
        for l in s.levels() {
            prop_assert_eq!(&LabelledLaminationJson::from(l).to_labelled().unwrap(), l);
        }
        Ok(())
    }))
}

/// Spine → τ → tableau matches the symbols the levels carry, and the
/// tableau gives τ back.
pub fn tableau_round_trips(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&select(small_spines()), |s| {
        let s = &s;
        let tau = tau_from_spine(s);
        let grid = tableau(&tau);
        prop_assert_eq!(grid.to_tau(s.fund_edges()), Ok(tau.clone()));
        let len = s.len() as u32;
        let reach = if s.fund_edges() == 1 { len } else { len - 1 };
        for n in 0..len {
            for i in 0..=len - n {
                if i + n > reach {
                    continue;
                }
                let carried = s.has_symbol(n as usize, i);
                prop_assert_eq!(
                    grid.is_marked(i, n),
                    carried,
                    "cell ({}, {}) of {:?}",
                    i,
                    n,
                    tau.values()
                );
            }
        }
        Ok(())
    }))?;
    report(runner(cases).run(&tau_strategy(30), |tau| {
        prop_assert_eq!(tableau(&tau).to_tau(tau.fund_edges()), Ok(tau));
        Ok(())
    }))
}

/// Spine data expands back to the tree, children's weights add up, and
/// the spine vertex at level `n` has modulus `2^{-k(n)}` and weight
/// `2^{k(n)} / 3^n`.
pub fn tree_properties(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&select(small_spines()), |s| {
        let s = &s;
        let t = tree_of(s);
        prop_assert!(t.validate(), "{:?}", t.violations());
        let sr = spine_and_return(&t).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let back = expand_from_spine(&sr, t.cutoff()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(back.same_as(&t));
        let json = TreeJson::from(&t)
            .to_tree()
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(json.same_as(&t));
        for v in 0..t.len() {
            if t.vertex(v).complete && t.weight(v).is_ok() && !t.vertex(v).children.is_empty() {
                prop_assert_eq!(child_weight_sum(&t, v), t.weight(v));
            }
        }
        let tau = tau_from_spine(s);
        let m = relative_moduli(&tau);
        let mut by_height: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
        for (v, x) in t.vertices().iter().enumerate() {
            if x.deg == 2 {
                by_height.entry(x.height).or_default().push(v);
            }
        }
        for n in 1..s.len() {
            let level = by_height
                .get(&r(1, 3i64.pow(n as u32)))
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            prop_assert_eq!(level.len(), 1, "level {}", n);
            let v = level[0];
            let k = tau.depth(n as u32);
            prop_assert_eq!(t.relative_modulus(v), Ok(m[n - 1]));
            prop_assert_eq!(m[n - 1], r(1, 1 << k));
            prop_assert_eq!(t.weight(v), Ok(r(1 << k, 3i64.pow(n as u32))));
        }
        Ok(())
    }))?;
    report(runner(cases.min(50)).run(&(1u32..=6), |depth| {
        let t = PolynomialTree::quadratic(r(1, 1 << depth));
        prop_assert!(t.validate());
        let sr = spine_and_return(&t).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(expand_from_spine(&sr, t.cutoff()).unwrap().same_as(&t));
        for v in 0..t.len() {
            if t.vertex(v).complete && t.weight(v).is_ok() && !t.vertex(v).children.is_empty() {
                prop_assert_eq!(child_weight_sum(&t, v), t.weight(v));
            }
        }
        Ok(())
    }))
}

pub type Property = fn(u32) -> Result<(), String>;

pub fn all() -> Vec<(&'static str, Property)> {
    vec![
        ("riemann-hurwitz on enumerated covers", riemann_hurwitz),
        ("canonical form rotation invariance", canonical_rotation),
        ("lattice chain, d_j e_j, Top integrality, |B| monotone", lattice_chain),
        ("twist period doubling", twist_doubling),
        ("cubic twists against the lattice induction", cubic_twists),
        ("spine, pictograph and JSON round trips", spine_round_trips),
        ("spine, tau and tableau round trips", tableau_round_trips),
        ("tree round trip, weights and moduli", tree_properties),
    ]
}
