use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Wiring or naming problem: unknown ports, uncovered inputs, bad parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numeric argument outside its domain, e.g. a non-positive step size.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A unit was asked to do something its current state does not allow.
    #[error("state error: {0}")]
    State(String),

    #[error("step controller error: {0}")]
    Controller(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unit `{unit}`: {source}")]
    Unit {
        unit: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn in_unit(self, unit: &str) -> Self {
        Error::Unit {
            unit: unit.to_string(),
            source: Box::new(self),
        }
    }

    /// Strips any unit context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Unit { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self.root(), Error::Config(_))
    }
}
