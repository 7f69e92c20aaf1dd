use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("certificate invalid: separating game value {margin} is not positive")]
    CertificateInvalid { margin: f64 },

    #[error("menu is empty")]
    EmptyMenu,

    #[error("threshold {threshold} exceeds the best learner payoff {max_payoff}")]
    ThresholdInfeasible { threshold: f64, max_payoff: f64 },

    #[error("schedule target {index} lies outside the menu (violation {violation})")]
    InvalidTarget { index: usize, violation: f64 },

    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: u128, cap: u128 },

    #[error("cutting-plane loop hit the iteration cap ({iterations}) without a feasible point")]
    IterationCapExceeded { iterations: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-readable tag used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::CertificateInvalid { .. } => "CertificateInvalid",
            Error::EmptyMenu => "EmptyMenu",
            Error::ThresholdInfeasible { .. } => "ThresholdInfeasible",
            Error::InvalidTarget { .. } => "InvalidTarget",
            Error::GridTooLarge { .. } => "GridTooLarge",
            Error::IterationCapExceeded { .. } => "IterationCapExceeded",
        }
    }
}
