use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation point coincides with an eigenvalue.
    #[error("pole: evaluation point {0} coincides with an eigenvalue")]
    Pole(f64),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numerical routine failed to converge. `partial` carries the last estimate, if any.
    #[error("numeric failure: {message}")]
    Numeric { message: String, partial: Option<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, partial: Option<f64>) -> Self {
        Error::Numeric { message: msg.into(), partial }
    }

    /// Process exit status used by the CLI: 2 for numeric failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric { .. } | Error::Pole(_) => 2,
            _ => 1,
        }
    }
}
