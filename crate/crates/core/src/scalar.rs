//! Floating-point abstraction shared by every module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the solvers are written against (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only for values outside the target range.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target float")
    }

    /// Converts a count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in target float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Largest absolute entry of a slice (0 for an empty slice).
pub fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Largest absolute entrywise difference of two equally long slices.
pub fn dist_inf<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}
