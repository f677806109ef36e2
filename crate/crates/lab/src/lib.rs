//! Experiments on Schottky surfaces driven by a JSON group config.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Cli};
pub use error::LabError;
