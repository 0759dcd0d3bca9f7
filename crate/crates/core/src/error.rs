use std::fmt;
use std::io;

/// Errors produced by pool mechanics, pricing, the simulation engine and the
/// command-line layer.
#[derive(Debug)]
pub enum CfmError {
    /// An argument is outside the domain of the operation (non-positive
    /// reserve or price, negative trade size, NaN).
    Domain(String),
    /// Requested output is at or beyond the feasibility cap of the pool.
    Infeasible { requested: f64, reserve: f64 },
    /// A quote no longer matches the pool it is applied to.
    StaleQuote { relative_drift: f64 },
    /// Invalid or missing configuration value.
    Config { key: String, message: String },
    Io(io::Error),
}

impl CfmError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CfmError::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CfmError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for CfmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfmError::Domain(msg) => write!(f, "domain error: {msg}"),
            CfmError::Infeasible { requested, reserve } => write!(
                f,
                "infeasible trade: requested output {requested} against reserve {reserve}"
            ),
            CfmError::StaleQuote { relative_drift } => write!(
                f,
                "stale quote: applying it would move the invariant by {relative_drift:e} (relative)"
            ),
            CfmError::Config { key, message } => write!(f, "config error in `{key}`: {message}"),
            CfmError::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for CfmError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CfmError::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for CfmError {
    fn from(err: io::Error) -> Self {
        CfmError::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, CfmError>;
