//! Configuration, pipelines and the verification suite behind the `rpn-shoot` binary.

pub mod commands;
pub mod config;
pub mod verify;

pub use commands::{cmd_scan, cmd_solve, cmd_verify, Outcome, EXIT_FAILURE, EXIT_NO_BRACKET, EXIT_OK};
pub use config::{Overrides, RunConfig, ScanConfig, SEED_ENV};
