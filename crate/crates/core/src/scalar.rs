use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the geometric layer is generic over (`f32`, `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Tolerance below which a point is considered to sit on the unit circle.
    fn boundary_guard() -> Self;
}

impl Real for f64 {
    #[inline]
    fn boundary_guard() -> Self {
        1e-12
    }
}

impl Real for f32 {
    #[inline]
    fn boundary_guard() -> Self {
        1e-6
    }
}
