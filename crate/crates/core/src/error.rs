use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Why an H-infinity step was rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeasibilityKind {
    /// `I - alpha*P + H'R^-1 H P` is numerically singular.
    IllConditioned { condition: f64 },
    /// The propagated covariance failed its Cholesky factorization.
    NotPositiveDefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidSpec(String),
    UnknownFrequency(f64),
    InsufficientData { needed: usize, available: usize },
    Feasibility { step: u64, kind: FeasibilityKind },
    NumericInput(&'static str),
    DegenerateEnvelope { step: u64, amplitude: f64 },
    Shape { expected: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(why) => write!(f, "invalid spec: {why}"),
            Error::UnknownFrequency(hz) => write!(f, "{hz} Hz is not on the IEC flicker grid"),
            Error::InsufficientData { needed, available } => {
                write!(f, "insufficient data: need {needed} samples, have {available}")
            }
            Error::Feasibility { step, kind } => match kind {
                FeasibilityKind::IllConditioned { condition } => write!(
                    f,
                    "H-infinity feasibility violated at step {step}: inner matrix condition {condition:.3e}"
                ),
                FeasibilityKind::NotPositiveDefinite => write!(
                    f,
                    "H-infinity feasibility violated at step {step}: covariance not positive definite"
                ),
            },
            Error::NumericInput(what) => write!(f, "non-finite numeric input: {what}"),
            Error::DegenerateEnvelope { step, amplitude } => write!(
                f,
                "degenerate envelope at step {step}: harmonic amplitude {amplitude:.3e} too small"
            ),
            Error::Shape { expected, found } => {
                write!(f, "shape mismatch: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
