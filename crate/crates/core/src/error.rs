use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(&'static str),
    /// A parameter set or configuration violates one of its invariants.
    InvalidParams(String),
    /// A bracketed root search was handed an interval without a sign change.
    NotBracketed { lo: f64, hi: f64 },
    /// Newton iteration did not reach the KCL residual bound.
    NoConvergence { iterations: usize, residual: f64 },
    /// A request contradicting an operating rule of a cell.
    Rejected(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidParams(what) => write!(f, "invalid parameters: {what}"),
            Error::NotBracketed { lo, hi } => {
                write!(f, "root not bracketed on [{lo}, {hi}]")
            }
            Error::NoConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "solver did not converge after {iterations} iterations (KCL residual {residual:e} A)"
            ),
            Error::Rejected(why) => write!(f, "rejected: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}
