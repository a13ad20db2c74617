//! One line per acceptance criterion. Every comparison is exact: integers,
//! rationals and lattices in Hermite normal form, tolerance zero.

mod common;

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::Instant;

use pictograph::json::{Document, PictographJson};
use pictograph_core::builder::{enumerate_cubic_spines, init_states, EnumOptions};
use pictograph_core::cubic::{
    doubling_rule, doubling_tau_prefix, marked_data, marked_levels, marked_pairs_from_prefix, marked_table,
    solenoid_analysis, spine_descriptor, tau_from_spine, top_count, tree_code, TauSequence, TreeCode, TruncatedSpine,
};
use pictograph_core::lamination::Rat;
use pictograph_core::pictograph::Pictograph;
use pictograph_core::twistlat::{analyze, lattice_index, ConjugacyReport, SpineDescriptor, TopCount, TwistLattice};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn r(n: i64) -> Rat {
    Rat::from_integer(n)
}

fn lattice(rows: &[&[i64]]) -> TwistLattice {
    let gens: Vec<Vec<Rat>> = rows.iter().map(|row| row.iter().map(|&x| r(x)).collect()).collect();
    TwistLattice::from_generators(rows[0].len(), &gens).unwrap()
}

fn two_edge(len: u32) -> Vec<TruncatedSpine> {
    let opts = EnumOptions {
        fund_edges: Some(2),
        ..EnumOptions::default()
    };
    enumerate_cubic_spines(len, &opts).unwrap()
}

fn tau(values: &[u32]) -> TauSequence {
    TauSequence::new(values.to_vec(), 2).unwrap()
}

fn spine_report(s: &TruncatedSpine) -> Result<ConjugacyReport, String> {
    let desc = spine_descriptor(s).map_err(|e| e.to_string())?;
    analyze(&desc, desc.levels.len()).map_err(|e| e.to_string())
}

fn descriptor(file: &str) -> SpineDescriptor {
    let path = format!("{}/tests/data/{file}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    match Document::from_json(&text).unwrap() {
        Document::Descriptor(d) => d.to_descriptor().unwrap(),
        other => panic!("{file} holds a {}", other.kind()),
    }
}

fn code(pairs: &[(u32, u32)]) -> TreeCode {
    TreeCode { pairs: pairs.to_vec() }
}

fn criterion_1() -> Outcome {
    let t = tau(&[0, 0, 1, 2, 0]);
    ensure(marked_levels(&t) == [0, 2], || {
        format!("marked levels {:?}", marked_levels(&t))
    })?;
    let m = &marked_data(&t)[1];
    ensure(m.modulus == r(1) && m.twist == 1, || {
        format!("m_1 = {}, t_1 = {}", m.modulus, m.twist)
    })?;
    ensure(top_count(&t) == 2, || format!("Top from τ = {}", top_count(&t)))?;
    let spines: Vec<TruncatedSpine> = two_edge(5).into_iter().filter(|s| tau_from_spine(s) == t).collect();
    ensure(!spines.is_empty(), || "no spine has this τ".into())?;
    for s in &spines {
        let rep = spine_report(s)?;
        ensure(rep.top == TopCount::Finite(2), || format!("lattice Top {:?}", rep.top))?;
    }
    Ok(format!(
        "marked {{2}}, m_1 = 1, t_1 = 1, Top = 2 from τ and from {} spine(s)",
        spines.len()
    ))
}

fn criterion_2() -> Outcome {
    let t = tau(&[0, 1, 2, 3]);
    let spines: Vec<TruncatedSpine> = two_edge(4).into_iter().filter(|s| tau_from_spine(s) == t).collect();
    ensure(!spines.is_empty(), || "no spine has this τ".into())?;
    let expected = |level: usize| match level {
        0 => lattice(&[&[1, 0], &[0, 1]]),
        1 | 2 => lattice(&[&[1, 0], &[0, 2]]),
        3 | 4 => lattice(&[&[2, 0], &[1, 2]]),
        _ => lattice(&[&[4, 0], &[3, 2]]),
    };
    for s in &spines {
        let rep = spine_report(s)?;
        ensure(rep.per_level.len() >= 6, || {
            format!("only {} levels", rep.per_level.len())
        })?;
        for (i, l) in rep.per_level.iter().enumerate() {
            for g in &l.groups {
                ensure(g.lattice == expected(i), || {
                    format!("level {i}: {} against {}", g.lattice, expected(i))
                })?;
            }
        }
        let last = &rep.per_level.last().unwrap().groups[0].lattice;
        let idx = lattice_index(last, &rep.base).map_err(|e| e.to_string())?;
        ensure(idx == 8, || format!("final index {idx}"))?;
        ensure(rep.top == TopCount::Finite(1), || format!("Top {:?}", rep.top))?;
    }
    Ok("<e1, 2e2> at 1-2, <2e1, e1+2e2> at 3-4, <4e1, 3e1+2e2> from 5, index 8, Top = 1".into())
}

fn criterion_3() -> Outcome {
    const J: usize = 20;
    let rule = doubling_rule(J);
    ensure(rule.len() == J, || format!("{} blocks", rule.len()))?;
    for (i, &(l, m)) in rule.iter().enumerate() {
        let j = i as u32 + 1;
        // l_j + 1 and m_j + 1 grow geometrically from j = 2
        let (want_l, want_m) = if j == 1 {
            (2, r(1))
        } else {
            (
                5 * (1u64 << (j - 2)) - 1,
                Rat::new(5 * 3i64.pow(j - 2), 1 << (j - 1)) - 1,
            )
        };
        ensure(l == want_l && m == want_m, || format!("block {j}: ({l}, {m})"))?;
    }
    let table = marked_table(&rule).map_err(|e| e.to_string())?;
    for (j, d) in table.iter().enumerate().skip(1) {
        let want = 1u64 << (j - 1);
        ensure(d.twist == want, || format!("t_{j} = {}", d.twist))?;
    }
    let sol = solenoid_analysis(&table, 6);
    for (j, &(big_t, ratio)) in sol.per_j.iter().enumerate().skip(1) {
        ensure(big_t == 1 << (j - 1) && ratio == 2, || {
            format!("j = {j}: T = {big_t}, ratio {ratio}")
        })?;
    }
    ensure(sol.twist_unbounded && sol.sol == Some(2), || format!("{sol:?}"))?;
    let from_prefix = marked_pairs_from_prefix(&doubling_tau_prefix(8));
    ensure(from_prefix.len() >= 7 && from_prefix[..7] == rule[..7], || {
        format!("τ prefix gives {:?}", &from_prefix[..from_prefix.len().min(7)])
    })?;
    Ok(format!(
        "t_j = T_(l_j) = 2^(j-1) through j = {J}, Sol = 2; τ prefix agrees on 7 blocks"
    ))
}

fn criterion_4() -> Outcome {
    let rep = analyze(&descriptor("degree5_two_edges.json"), 8).map_err(|e| e.to_string())?;
    let counts: Vec<u64> = rep.per_level.iter().map(|l| l.class_count).collect();
    ensure(counts == [1, 6, 12], || format!("|B_i| = {counts:?}"))?;
    let want = [lattice(&[&[1, 0], &[0, 6]]), lattice(&[&[2, 0], &[0, 6]])];
    for (i, w) in want.iter().enumerate() {
        let groups = &rep.per_level[i + 1].groups;
        ensure(groups.iter().all(|g| &g.lattice == w), || {
            format!("level {} lattice {}", i + 1, groups[0].lattice)
        })?;
        ensure(rep.per_level[i + 1].top == 1, || {
            format!("Top(D,{}) = {}", i + 1, rep.per_level[i + 1].top)
        })?;
    }
    ensure(rep.top == TopCount::Finite(1), || format!("Top {:?}", rep.top))?;
    Ok("|B_1| = 6, |B_2| = 12, <e1, 6e2>, <2e1, 6e2>, Top = 1".into())
}

fn criterion_5() -> Outcome {
    let four = analyze(&descriptor("degree4_two_classes.json"), 8).map_err(|e| e.to_string())?;
    ensure(four.top == TopCount::Finite(2), || {
        format!("degree 4 Top {:?}", four.top)
    })?;
    let five = analyze(&descriptor("degree5_symmetric.json"), 8).map_err(|e| e.to_string())?;
    let level = &five.per_level[1];
    ensure(level.aut_profile == BTreeMap::from([(1, 1), (2, 2)]), || {
        format!("profile {:?}", level.aut_profile)
    })?;
    let mut lattices: Vec<TwistLattice> = Vec::new();
    for g in &level.groups {
        lattices.extend(std::iter::repeat_n(g.lattice.clone(), g.count as usize));
    }
    lattices.sort();
    let mut want = vec![lattice(&[&[2]]), lattice(&[&[2]]), lattice(&[&[1]])];
    want.sort();
    ensure(lattices == want, || format!("lattices {lattices:?}"))?;
    ensure(five.top == TopCount::Finite(2), || {
        format!("degree 5 Top {:?}", five.top)
    })?;
    Ok("degree 4 Top = 2; degree 5 profile {2: 2, 1: 1}, lattices 2Z, 2Z, Z, Top = 2".into())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let census: Vec<Vec<TruncatedSpine>> = (1..=7).map(two_edge).collect();
    let secs = start.elapsed().as_secs_f64();
    for spines in &census[..4] {
        let mut codes: BTreeMap<TauSequence, TreeCode> = BTreeMap::new();
        for s in spines {
            let t = tau_from_spine(s);
            ensure(top_count(&t) == 1, || {
                format!("Top {} at τ {:?}", top_count(&t), t.values())
            })?;
            let c = tree_code(s);
            let prev = codes.insert(t.clone(), c.clone());
            ensure(prev.is_none_or(|p| p == c), || {
                format!("two codes for τ {:?}", t.values())
            })?;
        }
    }
    let five = &census[4];
    let target = tau(&[0, 1, 0, 1, 0]);
    let mut got: Vec<TreeCode> = five
        .iter()
        .filter(|s| tau_from_spine(s) == target)
        .map(tree_code)
        .collect();
    got.sort();
    let mut want = vec![
        code(&[(1, 0), (1, 1), (3, 0), (1, 1), (2, 3)]),
        code(&[(1, 0), (1, 1), (3, 0), (1, 1), (1, 3)]),
    ];
    want.sort();
    ensure(got == want, || format!("τ (0,1,0,1,0) codes {got:?}"))?;
    ensure(five.iter().any(|s| top_count(&tau_from_spine(s)) == 2), || {
        "no length-5 Top = 2".into()
    })?;
    for (i, spines) in census[..6].iter().enumerate() {
        let mut codes: Vec<TreeCode> = spines.iter().map(tree_code).collect();
        codes.sort();
        codes.dedup();
        ensure(codes.len() == spines.len(), || format!("length {} shares codes", i + 1))?;
    }
    let pair = code(&[(1, 0), (1, 1), (1, 2), (4, 0), (1, 1), (1, 2), (3, 4)]);
    let hits = census[6].iter().filter(|s| tree_code(s) == pair).count();
    ensure(hits == 2, || format!("code of the length-7 pair found {hits} times"))?;
    Ok(format!(
        "two-edge census {:?} spines, length-7 pair present; census took {secs:.1}s",
        census.iter().map(Vec::len).collect::<Vec<_>>()
    ))
}

fn criterion_7() -> Outcome {
    let mut failed = Vec::new();
    let all = common::all();
    for (name, check) in &all {
        if let Err(e) = check(common::CASES) {
            failed.push(format!("{name}: {e}"));
        }
    }
    if failed.is_empty() {
        Ok(format!("{} suites, {} cases each", all.len(), common::CASES))
    } else {
        Err(failed.join("; "))
    }
}

fn criterion_8() -> Outcome {
    let states = init_states(2);
    ensure(states.len() == 1, || format!("{} starting states", states.len()))?;
    let level0 = &states[0].levels()[0];
    let quad = Pictograph::quadratic();
    let figure8 = &quad.rows()[1].lamination;
    ensure(level0.canonical_form() == figure8.canonical_form(), || {
        "start is not the figure-8".into()
    })?;
    let desc = SpineDescriptor {
        degree: 2,
        fund_symmetries: vec![level0.symmetry_order(Some(2))],
        levels: Vec::new(),
        open_ended: false,
    };
    let rep = analyze(&desc, 0).map_err(|e| e.to_string())?;
    ensure(rep.top == TopCount::Finite(1), || format!("Top {:?}", rep.top))?;

    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("quadratic.json");
    std::fs::write(&path, Document::Pictograph(PictographJson::from(&quad)).to_json()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pictograph"))
        .arg("render")
        .arg(&path)
        .output()
        .unwrap();
    ensure(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })?;
    let svg = String::from_utf8(out.stdout).unwrap();
    let circles = svg.matches("fill=\"none\" stroke=\"black\"/>").count() - svg.matches("<path").count();
    let counts = (
        circles,
        svg.matches("<path").count(),
        svg.matches(" L ").count(),
        svg.matches("r=\"2.500\"").count(),
        svg.matches("<line").count(),
    );
    ensure(counts == (2, 1, 1, 1, 1), || {
        format!("(disks, chords, diameters, marks, edges) = {counts:?}")
    })?;
    Ok("one starting state, Top = 1, column of a marked circle over a figure-8".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        ("tau (0,0,1,2,0)", criterion_1),
        ("lattice table of (0,1,2,3)", criterion_2),
        ("solenoid doubling rule", criterion_3),
        ("degree-5 two-edge descriptor", criterion_4),
        ("degree-4 and symmetric degree-5 descriptors", criterion_5),
        ("cubic census", criterion_6),
        ("property suites", criterion_7),
        ("degree-2 path", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}) [{secs:.1}s, exact]: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {} ({name}) [{secs:.1}s, exact]: {why}", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
