//! Command-line harness over `recipsum-core`: configuration, parallel
//! drivers, record formats and the randomized verification suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod records;
pub mod suite;

pub use commands::{run, RunOutcome};
pub use config::Cli;
pub use error::{CliError, CliResult};
