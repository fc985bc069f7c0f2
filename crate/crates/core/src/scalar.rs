//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

pub use num_complex::Complex;

/// Floating point type the solvers are generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + Debug + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal to `T`.
#[inline(always)]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

/// Converts a count to `T`.
#[inline(always)]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).unwrap()
}

#[inline(always)]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap()
}

#[inline(always)]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline(always)]
pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Wraps an angle into `[0, 2pi)`.
#[inline]
pub fn wrap_2pi<T: Real>(a: T) -> T {
    let tau = T::TAU();
    let r = a % tau;
    if r < T::zero() {
        r + tau
    } else if r >= tau {
        r - tau
    } else {
        r
    }
}

/// Wraps an angle into `(-pi, pi]`.
#[inline]
pub fn wrap_pi<T: Real>(a: T) -> T {
    let r = wrap_2pi(a);
    if r > T::PI() {
        r - T::TAU()
    } else {
        r
    }
}
