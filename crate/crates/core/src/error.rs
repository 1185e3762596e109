use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the domain of an operation (wrong regime, bad range,
    /// non-coprime resonance pair, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A trajectory or an evaluation point came too close to a gravitating
    /// body (or to the complex collision set of the perturbation).
    #[error("singularity: {what} (separation {dist:.3e} at t = {t:.6})")]
    Singularity { what: String, dist: f64, t: f64 },

    /// An iteration failed to converge or a step-size underflowed.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Complex-time continuation could not make progress towards the
    /// requested endpoint; carries the closest approach to the target.
    #[error("continuation stalled {closest:.3e} away from the path end after {steps} steps")]
    ContinuationStall { closest: f64, steps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
