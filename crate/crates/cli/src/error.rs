use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("{0}")]
    Hypothesis(String),

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io { .. } | CliError::Json { .. } => 2,
            CliError::NoConvergence(_) => 3,
            CliError::Hypothesis(_) => 4,
            CliError::CheckFailed(_) => 5,
        }
    }
}

impl From<measdiv::Error> for CliError {
    fn from(e: measdiv::Error) -> Self {
        use measdiv::Error as E;
        match e {
            E::Hypothesis(m) => CliError::Hypothesis(m),
            E::EigenNoConvergence { .. } | E::ProjectionNoConvergence { .. } => CliError::NoConvergence(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
