//! Command-line front end, file formats and parallel sweeps for `bjj-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod grid;
pub mod sweep;
pub mod table;

pub use commands::{run, Cli, Command};
pub use error::CliError;
