use thiserror::Error;

/// Failures raised by the library. Each variant maps to one CLI exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its domain. `name` is the flag or field at fault.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A tie-breaker that can be reached with positive probability never ends.
    #[error("non-terminating configuration: {0}")]
    NonTerminating(String),

    /// Quadrature or another numerical routine missed its tolerance.
    #[error("numerical failure: {reason} (best estimate {estimate})")]
    Numerical { reason: String, estimate: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } => 2,
            Error::NonTerminating(_) => 3,
            Error::Numerical { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
