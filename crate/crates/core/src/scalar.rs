//! Floating-point scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the finite element pipeline is generic over.
///
/// Implemented for `f32` and `f64`. Certified tables are produced in `f64`;
/// `f32` is supported for the geometry and small solves.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded) in the
    /// supported scalar types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used for residual contracts: `1e-10`, or a few hundred ulps
    /// when the type cannot resolve that.
    #[inline]
    fn residual_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(256.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sum in fixed left-to-right order.
pub(crate) fn ordered_sum<T: Scalar>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().fold(T::zero(), |acc, v| acc + v)
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    ordered_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
