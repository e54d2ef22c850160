//! Error types shared across the crate.

use alloc::string::String;
use core::fmt;

use crate::fock::ModeLabel;

/// All failure modes of the library layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A mode label was not found in the state it was looked up in.
    UnknownMode(ModeLabel),
    /// A mode label would occur twice (tensor composition, fresh outputs).
    ModeCollision(ModeLabel),
    /// An argument was outside its documented domain.
    InvalidArgument(String),
    /// A request exceeded the exact-enumeration capacity guard.
    Capacity { requested: usize, max: usize },
    /// Correlation requested at zero driving, where the normalization
    /// is 0/0.
    UndefinedCorrelation,
    /// A two-photon observable was requested from a state truncated
    /// below two photons per mode.
    CutoffTooLow { needed: u8, actual: u8 },
    /// Measured inputs are incompatible with the vanishing-three-photon
    /// assumption behind the probability inversion.
    InconsistentExtraction(String),
    /// Side-peak normalization with a zero baseline.
    DegenerateNormalization,
    /// A tag stream violated the nondecreasing-bin ordering.
    UnsortedTags { index: usize },
    /// A least-squares fit could not be performed; carries the residual
    /// (or conditioning) diagnostic.
    FitError { residual: f64 },
    /// Normalization of a state with (numerically) zero norm.
    ZeroNorm,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownMode(m) => write!(f, "unknown mode {m}"),
            Error::ModeCollision(m) => write!(f, "mode {m} already present"),
            Error::InvalidArgument(s) => write!(f, "invalid argument: {s}"),
            Error::Capacity { requested, max } => {
                write!(f, "capacity exceeded: requested {requested}, max {max}")
            }
            Error::UndefinedCorrelation => {
                write!(f, "correlation undefined at zero pulse area")
            }
            Error::CutoffTooLow { needed, actual } => write!(
                f,
                "truncation cutoff {actual} too low for requested observable (needs {needed})"
            ),
            Error::InconsistentExtraction(s) => {
                write!(f, "inconsistent extraction inputs: {s}")
            }
            Error::DegenerateNormalization => {
                write!(f, "degenerate normalization: baseline is zero")
            }
            Error::UnsortedTags { index } => {
                write!(f, "tag stream not sorted by bin at record {index}")
            }
            Error::FitError { residual } => {
                write!(f, "fringe fit failed (residual {residual:e})")
            }
            Error::ZeroNorm => write!(f, "cannot normalize a zero-norm state"),
        }
    }
}

impl core::error::Error for Error {}
