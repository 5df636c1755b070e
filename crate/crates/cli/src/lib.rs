//! Command-line companion of `delaywave-core`: configuration files, CSV
//! output, parameter sweeps and decay fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod fit;
pub mod sweep;

pub use commands::{execute, Command, Options};
pub use error::{CliError, CliResult};
