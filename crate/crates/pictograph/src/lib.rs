//! JSON documents, SVG diagrams and the command-line front end for
//! `pictograph-core`.

pub use pictograph_core as core;

pub mod cli;
pub mod json;
pub mod svg;
