//! Configuration, run modes and file output for `spinbath`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
pub use run::{execute, Mode, RunSummary};
