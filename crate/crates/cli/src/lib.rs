//! Batch front end: parses a scenario file, runs one task and writes CSV
//! tables plus a JSON summary.

pub mod error;
pub mod scenario;
pub mod table;
pub mod tasks;
pub mod verify;

pub use error::CliError;
pub use scenario::{Scenario, Task};
pub use table::{emit_convergence_table, ConvergenceTable};
pub use tasks::{run, RunOptions, RunOutput};

/// Seed used when `SCONV_SEED` is unset.
pub const DEFAULT_SEED: u64 = 42;

/// Default cap on explicit Hilbert-space dimensions.
pub const DEFAULT_DIM_CAP: usize = sconv::operator::DEFAULT_DIM_CAP;

/// Reads `SCONV_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> Result<u64, CliError> {
    match std::env::var("SCONV_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::validation(format!("SCONV_SEED must be an unsigned integer, got {v:?}"), None)),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
