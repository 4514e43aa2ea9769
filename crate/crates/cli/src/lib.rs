//! Command line front end for `windtree-core`: configuration files, event
//! traces, seeded experiments and metric queries.

pub mod commands;
pub mod configfile;
pub mod error;
pub mod output;

pub use commands::{run, Cli, Command};
pub use configfile::ConfigFile;
pub use error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WINDTREE_OUT_DIR";
