use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expansion radius must be > 1, got {0}")]
    InvalidRadius(f64),

    #[error("radius index must be >= -1, got {0}")]
    IndexOutOfDomain(i64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed coin script: {0}")]
    Script(String),

    /// A strategy was asked to react in a state where the algorithm never
    /// reaches that branch. Indicates an engine bug, not a user error.
    #[error("strategy contract violated: {0}")]
    Contract(String),

    #[error("enumeration of {size} scripts exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
