//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over [`Real`], so the same code runs
//! at `f32` or `f64` precision. The concrete aliases exported from the crate
//! root fix `f64`, which is what the reference tolerances assume.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating-point scalar usable as the amplitude/energy type.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
    /// Convert an `f64` constant into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must be representable")
    }

    /// Lossy view of this scalar as `f64`, for reporting and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssignOps
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
