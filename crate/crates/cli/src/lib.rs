//! Command-line driver: compile, solve, extract duals, certify, simulate
//! and report.
//!
//! Exit codes: 0 success, 1 solver or infrastructure failure, 2 certificate
//! or bound violation, 3 bad input.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::{RunConfig, Tolerances};
pub use error::CliError;
pub use report::{Outcome, Report};

/// Exit code for malformed command lines.
pub const EXIT_BAD_INPUT: i32 = 3;
