use thiserror::Error;

/// Errors raised across the simulation stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("time t = {t:e} s outside the domain of `{model}`: {reason}")]
    TimeDomain {
        model: String,
        t: f64,
        reason: &'static str,
    },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s)")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step budget of {steps} exhausted at t = {t:e} s")]
    TooManySteps { t: f64, steps: usize },

    #[error("Fock truncation overflow at t = {t:e} s: top-level population {population:e}")]
    TruncationOverflow { t: f64, population: f64 },

    #[error("special function `{function}` domain error: {reason}")]
    SpecialDomain {
        function: &'static str,
        reason: String,
    },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("process `{process}` needs an initial spin {expected}, trajectory starts in {found}")]
    ProcessMismatch {
        process: &'static str,
        expected: &'static str,
        found: String,
    },

    #[error("non-thermal input: {0}")]
    NonThermal(String),

    #[error("ensemble shot {index} (seed {seed:#018x}) failed: {source}")]
    Shot {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
