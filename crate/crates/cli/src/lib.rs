//! Command-line front end for the monomial CKN verification suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod seeds;

pub use config::Config;
pub use error::{CliError, CliResult};
