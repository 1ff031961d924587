use std::path::PathBuf;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is numerically rank deficient (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("combinatorial budget exceeded: {count} subsets requested, limit is {limit}")]
    Budget { count: f64, limit: f64 },

    #[error("numerical domain error: {0}")]
    Domain(String),

    #[error("stability factor undefined: {0}")]
    StabilityUndefined(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller's configuration rather than by
    /// the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::ShapeMismatch(_)
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::Io { .. }
                | Error::Json(_)
                | Error::Budget { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
