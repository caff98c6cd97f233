use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inadmissible parameters: N = {n}, p = {p} ({reason})")]
    InadmissibleParameters { n: u32, p: f64, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("trajectory cannot be classified: {0}")]
    UnclassifiableTrajectory(String),

    #[error("bracket search failed: {0}")]
    BracketFailure(String),

    #[error("b = {b} is not above the critical value (trajectory went extinct at r = {r})")]
    NotAboveCritical { b: f64, r: f64 },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("insufficient samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Short stable identifier used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InadmissibleParameters { .. } => "InadmissibleParameters",
            Error::Domain(_) => "DomainError",
            Error::Overflow(_) => "Overflow",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::UnclassifiableTrajectory(_) => "UnclassifiableTrajectory",
            Error::BracketFailure(_) => "BracketFailure",
            Error::NotAboveCritical { .. } => "NotAboveCritical",
            Error::InvalidTrajectory(_) => "InvalidTrajectory",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::DegenerateFit(_) => "DegenerateFit",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InadmissibleParameters { .. } | Error::Domain(_) | Error::InvalidConfig(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
