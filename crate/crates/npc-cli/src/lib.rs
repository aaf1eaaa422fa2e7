//! Library surface of the `npc` command-line tool: configuration
//! resolution, the experiment runner, and report serialization. The
//! binary in `main.rs` is a thin argument-parsing shell over these.

pub mod config;
pub mod report;
pub mod runner;
