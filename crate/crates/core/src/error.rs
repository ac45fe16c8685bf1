use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value encountered in {what}")]
    NonFinite { what: String },

    #[error("eigensolver did not converge: {detail}")]
    NonConvergence { detail: String },

    /// Matrix expected to be positive definite failed factorization.
    #[error("factorization breakdown: {detail}")]
    Breakdown { detail: String },

    #[error("positivity check failed: {detail}")]
    Positivity { detail: String },

    #[error("quadrature did not converge: {detail}")]
    Quadrature { detail: String },

    #[error("fiber solve failed at p-index {index} (p = {p}): {source}")]
    FiberFailure {
        index: usize,
        p: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("root finding failed: {detail}")]
    RootFinding { detail: String },

    #[error("truncation too small: {detail}")]
    Truncation { detail: String },

    /// A bound expected to hold fails beyond its numerical margin.
    #[error("bound violated: {detail}")]
    BoundViolation { detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Config(_))
    }
}
