//! Command-line front end: JSON assemblage files, the individual tests,
//! pairwise pre-order exploration with DOT output, and SDPA dumps.

pub mod cli;
pub mod engine;
pub mod graph;
pub mod io;
pub mod sets;

#[cfg(feature = "clarabel")]
pub mod clarabel_backend;
