use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An iterative solver stopped before reaching its tolerance.
    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    Solver {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("failed to parse {context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) => 1,
            Error::Solver { .. } => 2,
            Error::Parse { .. } | Error::Io { .. } => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
