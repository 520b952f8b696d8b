use std::fmt::{Debug, Display};

use nalgebra::{ClosedAddAssign, ClosedMulAssign, ClosedSubAssign};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the numerical kernels are written against: `f32` or `f64`.
///
/// Quadrature nodes and eigen-decompositions are computed in `f64` and
/// converted, so `f32` instantiations inherit `f64` node accuracy rounded to
/// single precision.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + nalgebra::Scalar
    + ClosedAddAssign
    + ClosedSubAssign
    + ClosedMulAssign
    + 'static
{
    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
