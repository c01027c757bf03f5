//! Scalar abstraction for the numeric kernels.
//!
//! Everything that carries field data (coefficients, grid values, norms,
//! propagator kernels) is generic over [`Scalar`]; geometry descriptors and
//! experiment bookkeeping stay in `f64`. Concrete aliases for the common
//! instantiations live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: f32 or f64.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or descriptor value.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal must be representable")
    }

    /// Widening (or identity) conversion back to `f64` for reporting.
    fn to_f64x(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
