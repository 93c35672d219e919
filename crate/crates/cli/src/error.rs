use ckn_core::CknError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CknError),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// `2` for configuration and domain errors, `1` for numerical failures
    /// and output problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CknError::NonConvergence { .. }
                | CknError::IllConditioned(_)
                | CknError::NegativeMass { .. }
                | CknError::SupportViolation(_)
                | CknError::PositivityViolation(_)
                | CknError::ChartDomain(_) => 1,
                _ => 2,
            },
            CliError::Output(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
