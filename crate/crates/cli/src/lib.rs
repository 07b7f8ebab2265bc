//! Configuration, command runners and result files for the `edgewall` tool.

pub mod battery;
pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use run::{exit_code_for, run, RunOutcome};
