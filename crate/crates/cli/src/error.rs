use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid scenario: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] hepp_core::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the input, 3 for truncation
    /// leakage, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use hepp_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::Parse(_) | CliError::Invalid(_) => 2,
            CliError::Core(e) => match e {
                E::Leakage { .. } => 3,
                E::SymplecticDrift { .. } | E::NotUnitary(_) | E::Eigensolver(_) => 1,
                _ => 2,
            },
        }
    }
}
