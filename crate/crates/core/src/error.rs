use alloc::string::String;

/// Errors raised by the numerical routines.
///
/// Variants split into two families: input validation (bad labels, shapes, states)
/// and numerical verification failures, where a computation ran but its self-check
/// did not pass. [`Error::is_verification`] tells them apart.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("state is not Markov: I(A:C|B) = {0:.6e} bits exceeds tolerance")]
    NotMarkov(f64),
    #[error("algebra closure did not converge within {0} rounds")]
    NoConvergence(usize),
    #[error(
        "numerical verification failed: {what} (deviation {deviation:.3e}, tolerance {tol:.1e})"
    )]
    Verification {
        what: &'static str,
        deviation: f64,
        tol: f64,
    },
    #[error("size guard exceeded: total dimension {0} > {1}")]
    SizeGuard(usize, usize),
}

impl Error {
    /// True for failures of a numerical self-check rather than malformed input.
    pub fn is_verification(&self) -> bool {
        matches!(
            self,
            Error::NotMarkov(_) | Error::NoConvergence(_) | Error::Verification { .. }
        )
    }

    pub(crate) fn verification(what: &'static str, deviation: f64, tol: f64) -> Self {
        Error::Verification {
            what,
            deviation,
            tol,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
