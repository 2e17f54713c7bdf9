//! Scalar abstraction for scores.
//!
//! Scoring and search are generic over the floating point type used to
//! accumulate log marginal likelihoods. `f64` is the default everywhere; `f32`
//! is supported for memory-bound exact search on larger node sets.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// A real scalar usable as a log-score.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    /// Natural log of the gamma function for positive arguments.
    fn lgamma(self) -> Self;

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable as a float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable as a float")
    }

    /// Threshold below which two scores of magnitude `scale` are treated as equal.
    fn tolerance(scale: Self) -> Self {
        let rel = Self::epsilon() * Self::from_f64_lossy(64.0);
        rel * scale.abs().max(Self::one())
    }
}

impl Real for f64 {
    fn lgamma(self) -> Self {
        libm::lgamma(self)
    }
}

impl Real for f32 {
    fn lgamma(self) -> Self {
        libm::lgammaf(self)
    }
}
