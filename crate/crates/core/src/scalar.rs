//! Scalar abstraction for the floating-point parts of the library.
//!
//! Exponent and polytope arithmetic is always exact (`BigRational`); the
//! analytic side (evaluation, sphere geometry, box counting) is generic over
//! [`Real`] and instantiated with `f64` by the pipeline.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact rational scalar used for exponent vectors and polyhedra.
pub type Rational = num_rational::BigRational;
