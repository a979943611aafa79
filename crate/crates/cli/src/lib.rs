//! Configuration loading, experiment recipes and data files for `hybridmech`.
//!
//! Each experiment writes CSV data plus a `manifest.json` whose `config`
//! member reproduces the run byte for byte.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod validate;

pub use config::{load_config, parse_config, ExperimentConfig, Kind, RawConfig, Units};
pub use error::{CliError, CliResult};
pub use experiments::{compute, run_experiment, Outcome, RunReport};
