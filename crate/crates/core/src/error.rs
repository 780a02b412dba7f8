use thiserror::Error;

/// Errors raised by constructors, solvers and evaluators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A piecewise distribution failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// The requested evaluation method cannot handle this input.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A root finder was given an interval without a sign change.
    #[error("root not bracketed on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// An iterative method stopped before reaching its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("{name} must lie in (0, 1), got {p}"));
    }
    Ok(())
}

pub(crate) fn check_buyers(n: usize) -> Result<()> {
    if n == 0 {
        return domain("number of buyers must be at least 1");
    }
    Ok(())
}
