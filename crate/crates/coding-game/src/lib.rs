//! Command-line front end for the coding game: JSON run configs, the
//! subcommands, rayon-parallel drivers and the CSV/JSON writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;

pub use error::{CliError, CliResult};
