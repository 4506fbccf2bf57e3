//! File formats, tables and subcommands for the `sffm` binary.
//!
//! The numerical work lives in [`sffm_core`]; this crate reads TOML model
//! files, runs analyses and writes CSV tables.

mod error;

pub mod commands;
pub mod model_file;
pub mod parallel;
pub mod reference;
pub mod table;

pub use error::CliError;
