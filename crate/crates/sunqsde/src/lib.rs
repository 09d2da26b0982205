//! File formats and command-line front end for `sunqsde-core`.

pub mod cli;
pub mod formats;

pub use sunqsde_core as core;
