//! Command-line front end and file formats for `squimld-core`.
//!
//! Every command writes its CSV files, a gnuplot script per figure-like
//! table, and `manifest.json` into the output directory. CSV floats carry
//! 17 significant digits.

pub mod cli;
pub mod exec;
pub mod manifest;
pub mod output;
pub mod validate;

pub use squimld_core as core;

use std::io;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] squimld_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    /// 2 usage, 3 numerical failure, 4 validation failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use squimld_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParams(_) | E::HypothesisFails(_) | E::TooLarge { .. } | E::OutOfThetaRange { .. }) => 2,
            CliError::Core(_) => 3,
            CliError::Validation(_) => 4,
            _ => 1,
        }
    }
}
