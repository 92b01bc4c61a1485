//! Command-line layer: run configuration, dispersion sweeps, result files and
//! the identity checks behind `coherent-k validate`.

pub mod config;
pub mod error;
pub mod output;
pub mod sweep;
pub mod validate;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use sweep::{run_dispersion, SweepOutput, SweepRow};
pub use validate::{Report, Suite, Validator};
