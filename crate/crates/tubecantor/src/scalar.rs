//! Scalar abstraction for the geometric and analytic kernels.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the generic kernels.
///
/// Implemented by `f32` and `f64`. The construction pipeline itself is
/// instantiated at `f64` (see the aliases in the crate root); the generic
/// bound exists so the geometric predicates and the analytic formulas can be
/// exercised at other precisions.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + core::fmt::Debug + core::fmt::Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, panicking only for types that cannot
    /// represent ordinary finite constants.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant must convert")
    }

    /// Widening conversion to `f64`.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + core::fmt::Debug
        + core::fmt::Display
        + Send
        + Sync
        + 'static
{
}
