//! Command-line front end: scenario files in, CSV tables and plot data out.
//!
//! Exit codes: 0 success, 1 a bound fell below its simulated quantile,
//! 2 bad input.

pub mod commands;
pub mod csvio;
pub mod experiments;
pub mod presets;
pub mod scenario;

use aoc_core::sim::SimError;
use aoc_core::ParamError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("bound violated: {0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Violation(_) => 1,
        }
    }
}

impl From<scenario::ScenarioError> for CliError {
    fn from(e: scenario::ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csvio::CsvError> for CliError {
    fn from(e: csvio::CsvError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Empty => CliError::Input("simulation produced no samples".into()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Applies `AOC_THREADS` to the global thread pool.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("AOC_THREADS: expected a positive integer, got {v:?}")))?;
    // a second call (e.g. several commands in one test process) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
