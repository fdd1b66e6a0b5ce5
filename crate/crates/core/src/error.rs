use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine did not reach its target accuracy.
    #[error("accuracy error: {message} (best estimate {best_estimate:e}, error estimate {error_estimate:e})")]
    Accuracy {
        message: String,
        best_estimate: f64,
        error_estimate: f64,
    },

    /// Parameters outside the region where a family is a moment sequence.
    #[error("not a moment sequence: {0}")]
    NotMomentSequence(String),

    #[error("degenerate sequence: {0}")]
    Degenerate(String),

    #[error("not a positive Bernstein value: Phi({k}) = {value}")]
    NotPositiveBernstein { k: u64, value: f64 },

    /// The z -> 1-z transformation of 2F1 is not implemented for integer c-a-b.
    #[error("transformation unavailable: {0}")]
    TransformationUnavailable(String),

    #[error("r-gstable law undefined: {0}")]
    RgstableUndefined(String),

    #[error("scaling error: {0}")]
    Scaling(String),

    /// A sequence evaluation produced a non-finite value.
    #[error("non-finite value at n = {n}: {value}")]
    NonFinite { n: u64, value: f64 },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by invalid user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Accuracy { .. } | Error::Scaling(_) | Error::NonFinite { .. })
    }
}
