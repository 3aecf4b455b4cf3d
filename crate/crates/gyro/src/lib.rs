//! Scenario files, constants loading, CSV output and parallel drivers for
//! `gyro-core`, plus the subcommands behind the `gyro` binary.

pub mod commands;
pub mod constants;
pub mod csvio;
pub mod error;
pub mod parallel;
pub mod report;
pub mod scenario;

pub use error::{exit, CliError, Result};
