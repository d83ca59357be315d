use alloc::string::String;
use core::fmt;

/// Error type shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidArgument(String),
    /// Macroscopic point outside the rough region, or slope outside its domain.
    Domain(String),
    /// Coincident or otherwise singular input (Green function at w1 = w2).
    Singular(String),
    /// Trapezoidal quadrature did not settle before the node cap.
    Quadrature {
        nodes: usize,
        last_change: f64,
        value: f64,
    },
    /// A state that valid input can never produce.
    InternalInvariant(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Singular(m) => write!(f, "singular input: {m}"),
            Error::Quadrature {
                nodes,
                last_change,
                value,
            } => write!(
                f,
                "quadrature failed to converge: {nodes} nodes, last change {last_change:e}, value {value:e}"
            ),
            Error::InternalInvariant(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
