//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the estimator, the exact solver and the shock-tube
/// driver are written against. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal. Every `f64` literal used by the crate is
    /// representable (possibly rounded) in both supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target float")
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(0, self)`.
    #[inline]
    fn pos(self) -> Self {
        self.max(Self::zero())
    }

    /// `max(0, -self)`.
    #[inline]
    fn neg_part(self) -> Self {
        (-self).max(Self::zero())
    }
}

impl Real for f32 {}
impl Real for f64 {}
