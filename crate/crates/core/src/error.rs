use thiserror::Error;

/// Failure modes shared across the crate.
///
/// The variants are grouped so that a front end can map them onto exit codes:
/// input problems, mathematical refutations, and inconclusive or unstable
/// computations are kept apart.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("not a unit: {0}")]
    NotUnit(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("mismatched bases: {0}")]
    Mismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("refuted: {0}")]
    Refuted(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("unstable: {0}")]
    Unstable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}
pub(crate) use bail;
