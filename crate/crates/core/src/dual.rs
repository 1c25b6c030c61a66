//! Forward-mode dual numbers, nestable for exact second derivatives.
//!
//! `Dual<B>` carries one tangent: evaluating `f` on seeded duals yields the
//! directional derivative alongside the value. `Dual<Dual<B>>` carries two
//! independent tangents plus their cross term, so one pass produces the mixed
//! second derivative `∂²f/∂ε₁∂ε₂` exactly (no finite differencing anywhere).

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::real::{BaseFloat, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<R> {
    /// Value part.
    pub re: R,
    /// Tangent part.
    pub du: R,
}

impl<R: Real> Dual<R> {
    #[inline]
    pub fn new(re: R, du: R) -> Self {
        Dual { re, du }
    }

    /// A variable seeded with unit tangent.
    #[inline]
    pub fn var(re: R) -> Self {
        Dual { re, du: R::one() }
    }
}

/// Two-tangent second-order dual: `re.re` value, `du.re` first tangent,
/// `re.du` second tangent, `du.du` the mixed second derivative.
pub type Dual2<B> = Dual<Dual<B>>;

/// Seed a `Dual2` input with value `v`, ε₁-tangent `t1` and ε₂-tangent `t2`.
#[inline]
pub fn dual2_seed<R: Real>(v: R, t1: R, t2: R) -> Dual2<R> {
    Dual {
        re: Dual { re: v, du: t2 },
        du: Dual { re: t1, du: R::zero() },
    }
}

/// The mixed ∂²/∂ε₁∂ε₂ component of a `Dual2` result.
#[inline]
pub fn dual2_mixed<R: Real>(x: Dual2<R>) -> R {
    x.du.du
}

impl<R: Real> Add for Dual<R> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.du + rhs.du)
    }
}

impl<R: Real> Sub for Dual<R> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.du - rhs.du)
    }
}

impl<R: Real> Neg for Dual<R> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.du)
    }
}

impl<R: Real> Mul for Dual<R> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        // (f g)' = f' g + f g'
        Dual::new(self.re * rhs.re, self.du * rhs.re + self.re * rhs.du)
    }
}

impl<R: Real> Div for Dual<R> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        // (f / g)' = (f' g - f g') / g²
        let q = self.re / rhs.re;
        Dual::new(q, (self.du - q * rhs.du) / rhs.re)
    }
}

impl<R: Real> AddAssign for Dual<R> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.re += rhs.re;
        self.du += rhs.du;
    }
}

impl<R: Real> Real for Dual<R> {
    type Base = R::Base;

    #[inline]
    fn constant(c: R::Base) -> Self {
        Dual::new(R::constant(c), R::zero())
    }
    #[inline]
    fn zero() -> Self {
        Dual::new(R::zero(), R::zero())
    }
    #[inline]
    fn one() -> Self {
        Dual::new(R::one(), R::zero())
    }
    #[inline]
    fn primal(self) -> R::Base {
        self.re.primal()
    }
    #[inline]
    fn scale(self, c: R::Base) -> Self {
        Dual::new(self.re.scale(c), self.du.scale(c))
    }

    #[inline]
    fn sqrt(self) -> Self {
        // (√f)' = f' / (2√f)
        let s = self.re.sqrt();
        Dual::new(s, self.du / s.scale(R::Base::from_f64(2.0)))
    }

    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.du * e)
    }

    #[inline]
    fn ln_1p(self) -> Self {
        // (ln(1+f))' = f' / (1+f)
        Dual::new(self.re.ln_1p(), self.du / (R::one() + self.re))
    }

    #[inline]
    fn recip(self) -> Self {
        // (1/f)' = -f'/f²
        let r = self.re.recip();
        Dual::new(r, -self.du * r * r)
    }

    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.du.is_finite()
    }
}
