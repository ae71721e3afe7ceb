use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the arguments was violated. The message names it.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch in {op}: left is {left:?}, right is {right:?}")]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    /// A check could not run because a matrix it depends on lost rank.
    #[error("degenerate instance: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure_arg {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err($crate::Error::InvalidArgument(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure_arg;
