//! Degree-3 machinery: truncated spines, τ-sequences and tableaux, marked
//! levels, tree codes, pictographs and the conjugacy count.

mod descriptor;
mod pictograph;
mod spine;
mod tau;

pub use descriptor::{local_symmetry, lower_orbit_hits, orbit_on_spine, spine_descriptor, LocalSymmetry};

pub use pictograph::{pictograph_from_truncated, truncate};
pub use spine::{
    level_zero_base, level_zero_choices, next_level_choices, sym, tau_from_spine, tree_code, TreeCode, TruncatedSpine,
    LOWER,
};
pub use tau::{
    cubic_twist_periods, doubling_rule, doubling_tau_prefix, first_return_marked_levels, marked_data, marked_levels,
    marked_pairs_from_prefix, marked_table, relative_moduli, solenoid_analysis, tableau, top_count, MarkedGrid,
    MarkedLevel, SolenoidReport, TauSequence, DOUBLING_RULE_MAX, MAX_TAU_LEN,
};

use crate::lamination::LaminationError;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CubicError {
    #[error("fund_edges must be 1 or 2, got {0}")]
    FundEdges(u8),
    #[error("τ({n}) = {value} is not below {n}")]
    TauTooLarge { n: u32, value: u32 },
    #[error("τ({n}) = {value} exceeds τ({prev}) + 1", prev = n - 1)]
    TauJump { n: u32, value: u32 },
    #[error("τ has length {0}; at most {max} is supported", max = tau::MAX_TAU_LEN)]
    TauTooLong(usize),
    #[error("level {0} is not a valid continuation of the levels above it")]
    BadLevel(u32),
    #[error("marked level {0} does not increase the level or modulus")]
    NonMonotone(u64),
    #[error("modulus at marked level {0} is not dyadic")]
    NonDyadic(u64),
    #[error("an empty spine has no pictograph")]
    EmptySpine,
    #[error(transparent)]
    Lamination(#[from] LaminationError),
}
