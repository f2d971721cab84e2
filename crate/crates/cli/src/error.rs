use thiserror::Error;
use wpcn_core::WpcnError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 config, 3 infeasible, 4 resource or time budget, 5 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Resource(_) | CliError::Io(_) | CliError::Csv(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

impl From<WpcnError> for CliError {
    fn from(e: WpcnError) -> Self {
        let msg = e.to_string();
        match e {
            // every input reaching the core comes from the config
            WpcnError::InvalidParams(_) | WpcnError::UnsupportedAlpha(_) | WpcnError::Domain(_) => {
                CliError::Config(msg)
            }
            WpcnError::InfeasibleParams(_) => CliError::Infeasible(msg),
            WpcnError::Resource { .. } => CliError::Resource(msg),
            WpcnError::Bracket { .. } | WpcnError::NonConvergence { .. } | WpcnError::Quantization { .. } => {
                CliError::Numeric(msg)
            }
        }
    }
}
