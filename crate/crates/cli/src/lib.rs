//! Configuration handling and subcommands of the `seqrev` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{
    cmd_risk, cmd_simulate, cmd_sweep, cmd_thresholds, cmd_value, cmd_verify, CommandOutput, SweepFormat,
};
pub use config::{RunConfig, CONFIG_ENV};
pub use error::CliError;
