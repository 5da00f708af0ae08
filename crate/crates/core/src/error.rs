use thiserror::Error;

/// Errors raised by the numerical kernels and the norm solvers built on them.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e} after {subdivisions} subdivisions")]
    NonConvergent {
        estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("integral diverges: {0}")]
    NonIntegrable(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("no sign change found while bracketing root in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("objective is non-finite at every grid point")]
    AllSingular,

    #[error("function evaluation failed: {0}")]
    Evaluation(String),

    #[error("norm infinite: {0}")]
    NormInfinite(String),

    #[error("parse error at offset {offset}: expected one of {expected:?}")]
    Parse {
        offset: usize,
        expected: Vec<String>,
    },

    #[error("modular is not monotone in the scale parameter: {0}")]
    ModularNonMonotone(String),

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that mean "this quantity is +∞" rather than a failure
    /// of the computation itself.
    pub fn is_infinite(&self) -> bool {
        matches!(self, Error::NonIntegrable(_) | Error::NormInfinite(_))
    }
}
