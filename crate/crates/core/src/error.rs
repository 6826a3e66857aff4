use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record{}: {reason}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    MalformedRecord { line: Option<usize>, reason: String },

    #[error("invalid transition query: {0}")]
    InvalidQuery(String),

    #[error("risk set is empty")]
    EmptyRiskSet,

    #[error("no subject is in the initial state and under observation at s = {0}")]
    EmptyLandmark(f64),

    #[error("denominator P(T0 > s) is zero")]
    ZeroDenominator,

    #[error("censoring weight degenerated to zero at time {0} before the last type-1 event")]
    DegenerateWeight(f64),

    #[error("every simulated subject was truncated out of the study")]
    DegenerateCohort,

    #[error("{failed} of {total} bootstrap resamples failed")]
    TooManyFailures { failed: usize, total: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn malformed(reason: impl Into<String>) -> Self {
        Error::MalformedRecord { line: None, reason: reason.into() }
    }
}
