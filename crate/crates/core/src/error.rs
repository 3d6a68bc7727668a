use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("eigensolver did not converge")]
    EigenNonConvergence,

    #[error("linear system is singular to working precision at {context}")]
    Singular { context: String },

    #[error("integrator diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("no edge state found")]
    NoEdgeState,

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParam { .. }
                | Error::Config(_)
                | Error::Dimension(_)
                | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
