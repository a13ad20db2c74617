//! Exact combinatorial machinery for the basin of infinity of a complex polynomial.
//!
//! Everything here is finite and exact: angles are rationals on a circle of
//! circumference one, lattices are integer matrices over a common denominator,
//! and every count is an integer.
#![no_std]

extern crate alloc;

pub mod builder;
pub mod cubic;
pub mod lamination;
pub mod pictograph;
pub mod tree;
pub mod twistlat;
