use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("chain is not irreducible; the stationary distribution is not unique")]
    NotIrreducible,

    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate}, gap {gap:e})")]
    NoConvergence {
        iterations: usize,
        estimate: f64,
        gap: f64,
    },

    #[error("{what} needs {needed} items but the cap is {cap}{hint}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: usize,
        hint: &'static str,
    },
}

impl Error {
    pub(crate) fn cap(what: &'static str, needed: u128, cap: usize) -> Self {
        Error::CapExceeded {
            what,
            needed,
            cap,
            hint: "",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
