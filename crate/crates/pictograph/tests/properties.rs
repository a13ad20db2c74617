mod common;

use common::CASES;

#[test]
fn riemann_hurwitz() {
    common::riemann_hurwitz(CASES).unwrap();
}

#[test]
fn canonical_rotation() {
    common::canonical_rotation(CASES).unwrap();
}

#[test]
fn lattice_chain() {
    common::lattice_chain(CASES).unwrap();
}

#[test]
fn twist_doubling() {
    common::twist_doubling(CASES).unwrap();
}

#[test]
fn cubic_twists() {
    common::cubic_twists(CASES).unwrap();
}

#[test]
fn spine_round_trips() {
    common::spine_round_trips(CASES).unwrap();
}

#[test]
fn tableau_round_trips() {
    common::tableau_round_trips(CASES).unwrap();
}

#[test]
fn tree_properties() {
    common::tree_properties(CASES).unwrap();
}
