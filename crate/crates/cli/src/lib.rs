//! Library side of the `pu` binary: argument definitions, verification
//! suites, report types and command handlers.

pub mod args;
pub mod commands;
pub mod output;
pub mod report;
pub mod suites;

pub use args::{Cli, Command};
pub use commands::run;
