use mutacyc_core::QuiverError;
use mutacyc_ml::MlError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const VERIFICATION: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Core(#[from] QuiverError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => exit::VERIFICATION,
            CliError::Resource(_) => exit::RESOURCE,
            CliError::Core(e) => core_code(e),
            CliError::Ml(MlError::Core(e)) => core_code(e),
            CliError::Ml(
                MlError::NotConverged { .. }
                | MlError::NanLoss { .. }
                | MlError::ExpansionTooLarge { .. },
            ) => exit::RESOURCE,
            _ => exit::USAGE,
        }
    }
}

fn core_code(e: &QuiverError) -> i32 {
    match e {
        QuiverError::MemoryCap { .. } | QuiverError::Overflow { .. } => exit::RESOURCE,
        QuiverError::Undetermined { .. } | QuiverError::BadWitness { .. } => exit::VERIFICATION,
        _ => exit::USAGE,
    }
}
