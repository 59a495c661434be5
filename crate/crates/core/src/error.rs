//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("dense matrix of {needed} entries exceeds limit of {limit}")]
    Capacity { needed: usize, limit: usize },

    #[error("training diverged (non-finite loss) at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("non-finite value produced by gradient passing at layer {layer}")]
    Numeric { layer: usize },

    #[error("singular or ill-conditioned matrix: {0}")]
    Singular(String),

    #[error("attack failed at fake user {fake_user}: {source}")]
    Attack {
        fake_user: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("victim '{victim}' failed: {source}")]
    Victim {
        victim: String,
        #[source]
        source: Box<Error>,
    },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
