use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulation models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value for `{name}`: {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("time step {dt} s exceeds the resolution guard t_actuate/4 = {limit} s")]
    ResolutionGuard { dt: f64, limit: f64 },

    #[error("truth table is missing input pair ({0}, {1})")]
    MissingInputPair(u8, u8),

    #[error("gate code {0} is outside 0..=15")]
    CodeOutOfRange(u32),

    #[error("invalid phase program: {0}")]
    PhaseProgram(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for failures of the numerical guards (resolution, NaN/inf).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::ResolutionGuard { .. })
    }
}
