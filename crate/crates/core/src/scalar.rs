use num_traits::{Float, NumAssignOps, NumCast};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar the crate is generic over: `f32` or `f64`.
///
/// All geometry, invariants and network math are written against this
/// trait; the CLI and the concrete aliases at the crate root use `f64`.
pub trait Real:
    Float + NumAssignOps + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Cast from `f64`, rounding to the nearest representable value.
    #[inline]
    fn of(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 -> scalar cast")
    }

    /// Cast to `f64` (exact for `f32` and `f64`).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar -> f64 cast")
    }

    /// Cast from an index or count.
    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::of(v as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}
