use core::fmt;

use alloc::string::String;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument is outside its documented range.
    Domain(&'static str),
    /// A probability mass vector failed validation.
    InvalidDistribution(String),
    /// The total variation distance between the two inputs is at most δ,
    /// so the approximate divergence is zero and no cutoff exists.
    DivergenceZero,
    /// More than δ of the numerator's mass sits where the denominator
    /// vanishes; no finite cutoff removes exactly δ.
    InfiniteDivergence,
    /// Budgets with different Rényi orders cannot be composed.
    MismatchedAlpha,
    /// No ε ≥ 0 satisfies the requested DP target.
    InfeasibleTarget,
    /// A lookup past the last computed table entry.
    OutOfTable { index: usize, len: usize },
    /// A table that never reaches release probability 1.
    NotSaturated,
    /// A discretized weighted table decreased between consecutive counts.
    NonMonotoneTable { at: usize },
    /// No symmetric noise on the requested support admits a finite
    /// divergence at this δ.
    InfeasibleNoise { n_d: usize, delta: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidDistribution(why) => write!(f, "invalid distribution: {why}"),
            Error::DivergenceZero => write!(f, "divergence is zero"),
            Error::InfiniteDivergence => write!(f, "divergence is infinite"),
            Error::MismatchedAlpha => write!(f, "budgets have mismatched alpha"),
            Error::InfeasibleTarget => write!(f, "no epsilon >= 0 meets the DP target"),
            Error::OutOfTable { index, len } => {
                write!(f, "index {index} outside computed table of length {len}")
            }
            Error::NotSaturated => write!(f, "table never reaches release probability 1"),
            Error::NonMonotoneTable { at } => {
                write!(f, "weighted table decreases at count {at}")
            }
            Error::InfeasibleNoise { n_d, delta } => write!(
                f,
                "no noise on {n_d} points has finite divergence at delta = {delta}"
            ),
        }
    }
}

impl core::error::Error for Error {}
