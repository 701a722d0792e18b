use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required input file or directory could not be opened.
    #[error("cannot read {path}: {source}")]
    Ingestion {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed content in an otherwise readable input.
    #[error("{file}:{line}: {message}")]
    Format {
        file: String,
        line: usize,
        message: String,
    },

    /// A caller violated an operation precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numeric quantity left its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("graph has {nodes} nodes; exhaustive enumeration is limited to {limit}")]
    SizeGuard { nodes: usize, limit: usize },

    #[error("solver did not converge after {iterations} iterations (KKT gap {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("class {class} has {members} members, fewer than the {folds} folds requested")]
    Stratification {
        class: i64,
        members: usize,
        folds: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by bad input or usage rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Ingestion { .. }
                | Error::Format { .. }
                | Error::Contract(_)
                | Error::SizeGuard { .. }
                | Error::Stratification { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
