//! Scalar abstraction shared by the geometry, sampling and formula code.
//!
//! Everything numeric in the crate is written against [`Real`], which is
//! implemented for `f32` and `f64`. The concrete `f64` aliases exported from
//! the crate root are what the simulator and the CLI use; `f32` exists for
//! cheap previews and to keep the algorithms honest about tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Relative tolerance for on-plane tests, scaled by a window diameter
    /// (or volume) to obtain the absolute epsilons.
    fn geom_rel_eps() -> Self {
        let floor = Self::epsilon() * lit(64.0);
        let target: Self = lit(1e-12);
        target.max(floor)
    }

    /// Euler–Mascheroni constant.
    fn euler_gamma() -> Self {
        lit(0.577_215_664_901_532_9)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into any [`Real`].
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite literal")
}

/// Converts an integer count into any [`Real`].
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("representable count")
}

/// Lossy conversion back to `f64` (reporting, RNG bridging).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
