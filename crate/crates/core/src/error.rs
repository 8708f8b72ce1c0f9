use thiserror::Error;

/// Errors raised by the simulation and tuning core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A state, input or intermediate value became NaN or infinite.
    #[error("numeric divergence: {0}")]
    Divergence(&'static str),

    /// A configuration value violates its documented range.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// Type reduction was asked to reduce a set where every upper firing strength is zero.
    #[error("no rule fired")]
    NoRuleFired,

    #[error("csv output failed: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for [`Error::Divergence`].
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence(_))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
