//! Command-line front end for `erasetest-core`: scenario files, rendering,
//! and the built-in check suite.

pub mod commands;
pub mod paper_check;
pub mod render;
pub mod scenario_file;
