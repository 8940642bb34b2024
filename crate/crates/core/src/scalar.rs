//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar the physics is written against (`f32` or `f64`).
///
/// `RealField` supplies the transcendental functions and the linear algebra;
/// the `num-traits` conversions are used for literals and for output.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    <T as FromPrimitive>::from_f64(x).expect("literal representable in scalar type")
}

/// Lossy conversion to `f64`, used for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `e^{i x}`.
#[inline]
pub fn cis<T: Real>(x: T) -> Complex<T> {
    Complex::new(x.cos(), x.sin())
}

#[inline]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `1/√2`.
#[inline]
pub fn inv_sqrt2<T: Real>() -> T {
    T::one() / lit::<T>(2.0).sqrt()
}
