//! Library side of the `qsalloc` command-line tool: parameter handling,
//! report rendering and subcommand bodies.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;

pub use error::{exit, CliError, CliResult};
