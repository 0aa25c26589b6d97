use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid resolution {0}: must be even and at least 16")]
    InvalidResolution(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("field has nonzero mean (|û(0)| = {0:e})")]
    NonzeroMean(f64),
    #[error("field is not real-valued (conjugate-symmetry defect {0:e})")]
    NotReal(f64),
    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },
    #[error("interpolant {interp} is finer than the field grid {field}")]
    InterpolantTooFine { interp: String, field: String },
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("trajectory window is empty")]
    EmptyWindow,
    #[error("trajectory source has no data at s = {0}")]
    ProviderGap(f64),
    #[error("time step {dt} violates the explicit feedback bound dt < {bound}")]
    FeedbackStability { dt: f64, bound: f64 },
    #[error("numerical blow-up at s = {time} (step {step}): {what}")]
    Blowup { time: f64, step: u64, what: String },
    #[error("condition not met: {0}")]
    Condition(String),
}
