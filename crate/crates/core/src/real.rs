//! Scalar abstraction: the whole engine is generic over the working precision
//! (`f32` or `f64`) and over forward-mode dual numbers built on top of it.
//!
//! `BaseFloat` is the storage/arithmetic precision. `Real` is anything the
//! differentiable kernels can compute with: a base float, a `Dual<R>` carrying
//! one tangent, or a nested `Dual<Dual<R>>` carrying two tangents and their
//! mixed second derivative.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Working floating-point precision (`f32` or `f64`).
pub trait BaseFloat:
    Copy
    + PartialOrd
    + Debug
    + Display
    + FromStr
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const ZERO: Self;
    const ONE: Self;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln_1p(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;
    fn max(self, other: Self) -> Self;

    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// One draw from Uniform(lo, hi).
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;
}

macro_rules! impl_base_float {
    ($t:ty) => {
        impl BaseFloat for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;

            #[inline]
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn sqrt(self) -> Self {
                self.sqrt()
            }
            #[inline]
            fn exp(self) -> Self {
                self.exp()
            }
            #[inline]
            fn ln_1p(self) -> Self {
                self.ln_1p()
            }
            #[inline]
            fn sin(self) -> Self {
                self.sin()
            }
            #[inline]
            fn cos(self) -> Self {
                self.cos()
            }
            #[inline]
            fn abs(self) -> Self {
                self.abs()
            }
            #[inline]
            fn is_finite(self) -> bool {
                self.is_finite()
            }
            #[inline]
            fn max(self, other: Self) -> Self {
                self.max(other)
            }

            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
            fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
                Uniform::new(lo, hi).sample(rng)
            }
        }
    };
}

impl_base_float!(f32);
impl_base_float!(f64);

/// A scalar the differentiable kernels can run on.
///
/// Implemented by the base floats themselves and by [`crate::dual::Dual`],
/// so one generic code path yields values, first derivatives and (via
/// nesting) second derivatives.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    type Base: BaseFloat;

    fn constant(c: Self::Base) -> Self;
    fn zero() -> Self;
    fn one() -> Self;

    /// The value part, stripped of all tangents.
    fn primal(self) -> Self::Base;

    /// Multiply every component by a constant. For duals this is cheaper and
    /// exact compared to `constant(c) * self`.
    fn scale(self, c: Self::Base) -> Self;

    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln_1p(self) -> Self;
    fn recip(self) -> Self;

    fn is_finite(self) -> bool;
}

impl<B: BaseFloat> Real for B {
    type Base = B;

    #[inline]
    fn constant(c: B) -> Self {
        c
    }
    #[inline]
    fn zero() -> Self {
        B::ZERO
    }
    #[inline]
    fn one() -> Self {
        B::ONE
    }
    #[inline]
    fn primal(self) -> B {
        self
    }
    #[inline]
    fn scale(self, c: B) -> Self {
        self * c
    }
    #[inline]
    fn sqrt(self) -> Self {
        BaseFloat::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        BaseFloat::exp(self)
    }
    #[inline]
    fn ln_1p(self) -> Self {
        BaseFloat::ln_1p(self)
    }
    #[inline]
    fn recip(self) -> Self {
        B::ONE / self
    }
    #[inline]
    fn is_finite(self) -> bool {
        BaseFloat::is_finite(self)
    }
}

/// Numerically safe softplus: `x + log1p(exp(-x))` for positive `x`,
/// `log1p(exp(x))` otherwise.
#[inline]
pub fn softplus<S: Real>(x: S) -> S {
    if x.primal() > S::Base::ZERO {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic sigmoid, the derivative of softplus, in the same safe form.
#[inline]
pub fn sigmoid<S: Real>(x: S) -> S {
    if x.primal() > S::Base::ZERO {
        ((-x).exp() + S::one()).recip()
    } else {
        let e = x.exp();
        e * (e + S::one()).recip()
    }
}

/// Dot product of two equal-length slices.
#[inline]
pub fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += *x * *y;
    }
    acc
}
