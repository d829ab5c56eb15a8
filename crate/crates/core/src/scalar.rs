//! Numeric abstraction shared by the solvers.
//!
//! Every solver in the crate is written once, generically, and instantiated
//! at `f64` for everyday use and at `BigRational` for the exact mode that
//! anchors the floating results on small rational instances.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Exact conversion from a binary double; lossless for both instances.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// Comparison slack used when deciding signs inside the solvers.
    /// Zero in exact mode.
    fn eps() -> Self;

    fn is_positive_eps(&self) -> bool {
        *self > Self::eps()
    }
    fn is_negative_eps(&self) -> bool {
        *self < -Self::eps()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn eps() -> Self {
        1e-11
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn eps() -> Self {
        Zero::zero()
    }
}
