use std::path::PathBuf;

use subset_evidence::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const IDENTITY_FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INCOMPATIBLE: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },

    #[error("{0}")]
    Core(#[from] CoreError),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            CliError::Dataset { .. } => exit::INCOMPATIBLE,
            _ => exit::USAGE,
        }
    }
}

/// Data that parses but cannot be scored by a configured model maps to
/// [`exit::INCOMPATIBLE`]; everything else is a usage or configuration error.
fn core_exit_code(e: &CoreError) -> u8 {
    use CoreError::*;
    match e {
        EmptyDataset
        | MixedDatumKinds { .. }
        | NonFiniteDatum { .. }
        | KindMismatch { .. }
        | LabelOutOfRange { .. }
        | ZeroProbabilityConditioning { .. }
        | DegenerateEvidence
        | IndeterminateBayesFactor => exit::INCOMPATIBLE,
        _ => exit::USAGE,
    }
}
