use serde::Serialize;
use thiserror::Error;

use crate::args::{Cli, Format};

/// Failures mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("table mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl From<roy_core::Error> for CliError {
    fn from(e: roy_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Rendered output plus the failure, if any, that decides the exit code.
/// Results are printed even when the run fails a convergence or table check.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub diagnostics: Vec<String>,
    pub failure: Option<CliError>,
}

#[derive(Serialize)]
struct JsonReport<'a, R: Serialize> {
    config: &'a Cli,
    results: &'a [R],
    diagnostics: &'a [String],
}

/// Renders `rows` as a JSON report embedding `config`, or as CSV.
pub fn render<R: Serialize>(config: &Cli, rows: &[R], diagnostics: &[String]) -> Result<String, CliError> {
    match config.format {
        Format::Json => {
            let report = JsonReport { config, results: rows, diagnostics };
            let mut s = serde_json::to_string_pretty(&report).map_err(|e| CliError::Domain(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| CliError::Domain(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Domain(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Domain(e.to_string()))
        }
    }
}

/// Builds an outcome from rows, turning convergence warnings into a failure.
pub fn finish<R: Serialize>(
    config: &Cli,
    rows: &[R],
    diagnostics: Vec<String>,
    failure: Option<CliError>,
) -> Result<Outcome, CliError> {
    let stdout = render(config, rows, &diagnostics)?;
    Ok(Outcome { stdout, diagnostics, failure })
}
