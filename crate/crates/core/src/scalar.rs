//! Floating scalar abstraction for the metric side of the library.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar for edge lengths, intensities, and statistics.
///
/// Implemented by `f32` and `f64`; concrete aliases at the crate root use
/// `f64`.
pub trait Scalar:
    Float + FromPrimitive + core::fmt::Debug + core::fmt::Display + Send + Sync + 'static
{
    fn from_f64_exact(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to any Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
