use thiserror::Error;
use trophwave_core::{ModelError, OdeError, PdeError, WaveError};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const SUBCRITICAL: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Subcritical(String),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => exit::USAGE,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Subcritical(_) => exit::SUBCRITICAL,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidState(_) | ModelError::Domain { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::Model(m) => m.into(),
            OdeError::InvalidInput(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::Model(m) => m.into(),
            PdeError::NonFinite(_) | PdeError::InsufficientTrace(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<WaveError> for CliError {
    fn from(e: WaveError) -> Self {
        match e {
            WaveError::Model(m) => m.into(),
            WaveError::Subcritical { .. } | WaveError::Degenerate { .. } => {
                CliError::Subcritical(format!("refused: {e}"))
            }
            WaveError::QFaceExit { .. } | WaveError::Integrate(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
