use thiserror::Error;

/// Errors raised across the library.
///
/// The variants map onto the CLI exit codes: configuration problems exit
/// with 1, capacity aborts with 3. Verification failures are not errors;
/// they are reported through [`crate::verify::VerificationReport`].
#[derive(Debug, Error)]
pub enum LabError {
    /// An argument violated an operation's precondition.
    #[error("input error: {0}")]
    Input(String),
    /// An exhaustive computation or hint volume exceeded its bound.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// An adversary or learner broke a protocol guarantee.
    #[error("contract violation: {0}")]
    ContractViolation(String),
    /// The experiment configuration is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),
    /// Scaling fit could not be computed.
    #[error("fit error: {0}")]
    Fit(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        LabError::Input(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        LabError::Capacity(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        LabError::ContractViolation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
