//! Library surface of the experiment runner, so integration tests can drive
//! parsing and execution directly.

pub mod config;
pub mod csv;
pub mod error;
pub mod runner;
pub mod svg;

pub use config::{parse_config, parse_config_str, to_toml_string, ExperimentConfig};
pub use error::CliError;
pub use runner::{execute, Command, Manifest};
