use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the support or domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge after {evaluations} evaluations (estimate {value}, error {abs_error})")]
    NonConvergence {
        value: f64,
        abs_error: f64,
        evaluations: usize,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("optimizer failed: {0}")]
    OptimizerFailed(String),

    #[error("not enough data: need at least {needed} exceedances, found {found}")]
    TooFewExceedances { needed: usize, found: usize },

    /// Observations at or above the assumed upper bound (1-based input lines).
    #[error("{} observation(s) at or above the upper bound {bound} on line(s) {rows:?}", rows.len())]
    BoundViolation { bound: f64, rows: Vec<usize> },

    #[error("bootstrap dropped {dropped} of {replicates} replicates (more than 10%)")]
    BootstrapFailure { dropped: usize, replicates: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
