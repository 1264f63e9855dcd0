use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the toolkit.
///
/// [`Error::is_validation`] separates bad input from a computation that
/// failed on valid input; the CLI maps the two onto different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("steady-state cubic has no non-negative root")]
    NoPhysicalRoot,

    #[error("closed-form denominator is not positive ({0:e})")]
    SingularDenominator(f64),

    #[error("large-n tail coefficient undefined for zero coupling")]
    TailUndefined,

    #[error("operation requires g0 > 0")]
    CouplingZero,

    #[error("harmonic balance did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("harmonic-balance Jacobian is singular")]
    JacobianSingular,

    #[error("integration unstable at t = {time}: |state| = {magnitude:e}")]
    Instability { time: f64, magnitude: f64 },

    #[error("segment length {segment} exceeds signal length {len}")]
    SegmentTooLong { segment: usize, len: usize },

    #[error("found {found} peak(s), {wanted} required")]
    NoPeaksFound { found: usize, wanted: usize },

    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("red side-band centre must exceed blue side-band centre")]
    OrderingViolation,

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by a
    /// numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InvalidConfig(_)
                | Error::SegmentTooLong { .. }
                | Error::OrderingViolation
                | Error::Parse(_)
        )
    }
}
