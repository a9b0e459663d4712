use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation is larger than the configured limit.
    #[error("capacity exceeded: {what} ({size} > limit {limit})")]
    Capacity {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("impact lookup failed: no entry for {0} and no default")]
    Lookup(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }

    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Json(_))
    }
}
