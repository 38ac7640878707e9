use thiserror::Error;

pub type Result<T> = std::result::Result<T, MlError>;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("need at least {needed} row(s), got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("length mismatch: {0} predictions vs {1} truths")]
    LengthMismatch(usize, usize),
    #[error("label {label} out of range for {classes} class(es)")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("SMO did not converge after {iterations} iterations (KKT gap {gap:.3e}, tolerance {tol:.1e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        tol: f64,
    },
    #[error("loss became NaN at epoch {epoch}, batch {batch}")]
    NanLoss { epoch: usize, batch: usize },
    #[error("expansion of degree {degree} needs {terms} coefficients, above the limit of {limit}")]
    ExpansionTooLarge {
        degree: u32,
        terms: usize,
        limit: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] mutacyc_core::QuiverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
