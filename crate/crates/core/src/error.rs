use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MacError {
    /// An argument fell outside the domain of a numerical routine.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Superposition needs the stronger user to carry at least one bit.
    #[error("no superposition possible: {0}")]
    NoSuperposition(String),

    /// The requested operating point lies outside what the scheme can reach.
    #[error("infeasible target: violates {bound}")]
    Infeasible { bound: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("constellation construction failed: {0}")]
    Construction(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MacError>;
