//! Error type shared across the crate.
//!
//! Construction-time validation (stability, positivity, sortedness) lives on the model
//! types, so solver entry points can assume a well-formed instance; the variants here
//! cover everything that can still go wrong afterwards: degenerate linear systems,
//! optimizer brackets that turn out to be mis-specified, quadrature that cannot reach
//! the requested tolerance, and malformed run configurations.

use std::fmt;

/// Crate-wide error enum. Variants carry enough context to be actionable from a CLI.
#[derive(Debug)]
pub enum Error {
    /// Offered load is at or above capacity; no stationary regime exists.
    UnstableSystem { rho: f64 },
    /// A rate, cost, priority, or tolerance that must be positive and finite is not.
    InvalidParameter(String),
    /// An operation requiring exactly `expected` classes was called with `got`.
    WrongArity { expected: usize, got: usize },
    /// A per-class index outside `0..len`.
    IndexOutOfRange { index: usize, len: usize },
    /// Gaussian elimination hit a (numerically) zero pivot.
    SingularSystem,
    /// A scalar minimizer terminated on a bracket endpoint, which signals the bracket
    /// does not contain the minimum. `floor` is true at the lower endpoint.
    BracketExhausted { endpoint: f64, floor: bool },
    /// Adaptive quadrature exceeded its subdivision budget before meeting tolerance.
    QuadratureFailure { achieved: f64, requested: f64 },
    /// A structural hypothesis of a bound or reduction does not hold for the instance.
    HypothesisViolation(String),
    /// Run configuration is missing, unreadable, or inconsistent with the chosen mode.
    Config(String),
    /// Filesystem failure while reading configs or writing reports.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnstableSystem { rho } => {
                write!(f, "system is unstable: offered load rho = {rho} >= 1")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::WrongArity { expected, got } => {
                write!(f, "operation requires exactly {expected} class(es), got {got}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "class index {index} out of range for {len} classes")
            }
            Error::SingularSystem => write!(f, "linear system is singular"),
            Error::BracketExhausted { endpoint, floor } => write!(
                f,
                "minimizer pinned to bracket {} endpoint {endpoint}; widen the bracket",
                if *floor { "lower" } else { "upper" }
            ),
            Error::QuadratureFailure { achieved, requested } => write!(
                f,
                "quadrature stalled at error {achieved:.3e} (requested {requested:.3e})"
            ),
            Error::HypothesisViolation(msg) => write!(f, "hypothesis violated: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
