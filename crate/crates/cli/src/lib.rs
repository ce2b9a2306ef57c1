//! Command-line front end: reads a one-column dataset and a JSON hypothesis
//! file, then scores, verifies, compares, or tabulates subset scores.
//!
//! Exit codes: 0 success, 1 identity check failed, 2 usage or configuration
//! error, 3 data incompatible with a configured model.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod format;

use std::ffi::OsString;
use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{execute, Command, OutputFormat, Rendered, RunConfig};
pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "subset-evidence",
    version,
    about = "Exact model evidence and subset cross-validation scores"
)]
struct Args {
    /// score | verify | compare | subsets
    #[arg(value_enum)]
    command: Command,
    /// One-column dataset (.csv, or .json holding a flat array)
    #[arg(long)]
    data: PathBuf,
    /// JSON hypothesis configuration
    #[arg(long)]
    config: PathBuf,
    /// Report format; `subsets` defaults to csv, the rest to text
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Dataset format when the extension is not enough
    #[arg(long, value_enum)]
    data_format: Option<dataset::DataFormat>,
    /// Skip the first line of a CSV dataset
    #[arg(long)]
    header: bool,
    /// Absolute residual allowed by `verify`
    #[arg(long)]
    tolerance: Option<f64>,
    /// Largest dataset the subset lattice will accept
    #[arg(long)]
    d_max: Option<usize>,
    /// Worker threads for the lattice
    #[arg(long, default_value = "1")]
    threads: NonZeroUsize,
    /// Extra leave-m-out scores for `score`, e.g. 2,3
    #[arg(long, value_delimiter = ',')]
    leave_out: Vec<usize>,
}

impl From<Args> for RunConfig {
    fn from(a: Args) -> Self {
        RunConfig {
            format: a.format.unwrap_or_else(|| a.command.default_format()),
            command: a.command,
            data: a.data,
            data_format: a.data_format,
            header: a.header,
            config: a.config,
            tolerance: a.tolerance,
            d_max: a.d_max,
            threads: a.threads,
            leave_out: a.leave_out,
        }
    }
}

/// What the process should print and return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Parses arguments (including the program name) and runs one command.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(args) => args,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: exit::USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: exit::SUCCESS,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(&args.into()) {
        Ok(r) => Outcome {
            code: r.code,
            stdout: r.output,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
