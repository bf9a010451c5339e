//! Experiment driver: config parsing, the experiment registry and CSV/JSON
//! result files.

pub mod descriptor;
pub mod experiment;
pub mod registry;
pub mod table;

use std::path::Path;

use dynwalk::Error;

pub use experiment::{run, ExperimentSpec, Kind, Report};
pub use table::{Cell, Table};

/// Seed used when neither the config nor `--seed` provides one.
pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] dynwalk::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            // rejected input values, as opposed to failures while running
            CliError::Run(
                Error::Parse { .. }
                | Error::InvalidParameter(_)
                | Error::InvalidMatrix(_)
                | Error::InvalidDistribution(_)
                | Error::InvalidGraph(_)
                | Error::DimensionMismatch { .. }
                | Error::VertexOutOfRange { .. }
                | Error::NotReversible { .. },
            ) => EXIT_CONFIG,
            CliError::Run(_) | CliError::Io(_) => EXIT_RUNTIME,
        }
    }
}

/// Runs `spec` and writes its table to `out`, falling back to the spec's
/// own output path. Returns the report and the bytes written.
pub fn execute(spec: &ExperimentSpec, seed: Option<u64>, out: Option<&Path>) -> Result<(Report, Vec<u8>), CliError> {
    let report = run(spec, seed)?;
    let bytes = match out.or(spec.output.as_deref()) {
        Some(path) => {
            let bytes = report.table.encode_for(path)?;
            std::fs::write(path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            bytes
        }
        None => report.table.to_csv()?,
    };
    Ok((report, bytes))
}
