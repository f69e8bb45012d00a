use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("point outside model: {0}")]
    OutsideModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scale window: {0}")]
    Window(String),

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("point cap exceeded: {emitted} points emitted before the cap of {cap}")]
    CapExceeded { emitted: usize, cap: usize },

    #[error("oracle contract violated: {0}")]
    Oracle(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
