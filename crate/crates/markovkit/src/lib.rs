//! File formats, JSON reports and the `markovkit` command-line frontend on top of
//! [`markovkit_core`], whose modules are re-exported here.
//!
//! - [`state_file`]: the JSON state format and its index convention.
//! - [`report`]: serializable views of core results, versioned `"markovkit/1"`.
//! - [`cli`]: argument parsing, configuration and exit codes.

pub mod cli;
mod commands;
pub mod error;
pub mod parallel;
pub mod report;
pub mod state_file;

pub use commands::resolve_grouping;
pub use error::{CliError, CliResult};
pub use markovkit_core::*;
