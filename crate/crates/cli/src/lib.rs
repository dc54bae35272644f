//! Configuration files and grid/CSV plumbing behind the `boxcalc` binary.

pub mod config;
pub mod grid;
