use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed an out-of-range or inconsistent argument.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input violated a numerical contract (Hermiticity, trace, PSD).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A linear system needed by an operation is singular or too badly conditioned.
    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),

    #[error("requested size {size} exceeds the configured cap of {cap}")]
    Resource { size: usize, cap: usize },

    #[error("environment error: {0}")]
    Environment(String),

    /// The external solver ran but its output could not be understood.
    #[error("protocol error: {message}\n--- captured output ---\n{output}")]
    Protocol { message: String, output: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
