//! Command-line front end: config resolution, dispatch and result files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use args::{Cli, Command};
pub use config::{Format, RunConfig, Subcommand};
pub use error::{CliError, Result};
pub use output::{ResultRecord, Table, Value, Written};
pub use run::{compute, run};
