//! Scenario-driven front end for `hepp-core`: classical flows, the two
//! symbol expansions, the truncated-Fock oracle and the inequality sweep,
//! each reported as versioned JSON.

pub mod commands;
pub mod error;
pub mod scenario;

pub use commands::{run, Command, MethodChoice, Options, Outcome, Status};
pub use error::CliError;
pub use scenario::{Scenario, SCHEMA_VERSION};

/// Reads and validates a scenario file.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Scenario::from_json(&text)
}
