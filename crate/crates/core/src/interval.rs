//! Closed floating-point intervals with outward rounding.
//!
//! Every arithmetic result is widened by one ulp on each side, which keeps
//! the exact real result inside the interval without touching the FPU
//! rounding mode.

use std::fmt;

use num_traits::Float;

/// A binary floating-point type that can step to its neighbours.
pub trait Scalar: Float + fmt::Debug + fmt::Display + 'static {
    /// Smallest representable value strictly greater than `self`.
    fn next_up(self) -> Self;
    /// Largest representable value strictly smaller than `self`.
    fn next_down(self) -> Self;
}

macro_rules! impl_scalar {
    ($t:ty, $bits:ty) => {
        impl Scalar for $t {
            fn next_up(self) -> Self {
                if self.is_nan() || self == <$t>::INFINITY {
                    return self;
                }
                if self == 0.0 {
                    return <$t>::from_bits(1);
                }
                let bits = self.to_bits();
                if self > 0.0 {
                    <$t>::from_bits(bits + 1)
                } else {
                    <$t>::from_bits(bits - 1)
                }
            }

            fn next_down(self) -> Self {
                -(-self).next_up()
            }
        }
    };
}

impl_scalar!(f32, u32);
impl_scalar!(f64, u64);

/// The closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<F> {
    lo: F,
    hi: F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalError {
    /// Bounds are NaN or `lo > hi`.
    Malformed,
    /// Division by an interval that contains zero.
    ZeroDivisor,
}

impl<F: Scalar> Interval<F> {
    pub fn new(lo: F, hi: F) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::Malformed);
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: F) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Widens an already rounded-to-nearest value to an interval that is
    /// guaranteed to contain the value it approximates.
    pub fn around(x: F) -> Self {
        Interval { lo: x.next_down(), hi: x.next_up() }
    }

    pub fn lo(&self) -> F {
        self.lo
    }

    pub fn hi(&self) -> F {
        self.hi
    }

    pub fn width(&self) -> F {
        self.hi - self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: F) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(F::zero())
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Self) -> Self {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    fn outward(lo: F, hi: F) -> Self {
        Interval { lo: down(lo), hi: up(hi) }
    }

    pub fn neg(&self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::outward(self.lo + other.lo, self.hi + other.hi)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::outward(self.lo - other.hi, self.hi - other.lo)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let products = [
            mul0(self.lo, other.lo),
            mul0(self.lo, other.hi),
            mul0(self.hi, other.lo),
            mul0(self.hi, other.hi),
        ];
        let lo = products.iter().copied().fold(F::infinity(), F::min);
        let hi = products.iter().copied().fold(F::neg_infinity(), F::max);
        Self::outward(lo, hi)
    }

    pub fn div(&self, other: &Self) -> Result<Self, IntervalError> {
        if other.contains_zero() {
            return Err(IntervalError::ZeroDivisor);
        }
        let quotients = [
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        ];
        let lo = quotients.iter().copied().fold(F::infinity(), F::min);
        let hi = quotients.iter().copied().fold(F::neg_infinity(), F::max);
        Ok(Self::outward(lo, hi))
    }

    pub fn min(&self, other: &Self) -> Self {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn max(&self, other: &Self) -> Self {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn abs(&self) -> Self {
        if self.lo >= F::zero() {
            *self
        } else if self.hi <= F::zero() {
            self.neg()
        } else {
            Interval { lo: F::zero(), hi: (-self.lo).max(self.hi) }
        }
    }

    /// Raises to a non-negative integer power.
    pub fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return Interval::point(F::one());
        }
        let mag = self.abs();
        if n.is_multiple_of(2) {
            return Interval { lo: pow_down(mag.lo, n), hi: pow_up(mag.hi, n) };
        }
        let signed_pow = |x: F, upward: bool| {
            if x >= F::zero() {
                if upward { pow_up(x, n) } else { pow_down(x, n) }
            } else if upward {
                -pow_down(-x, n)
            } else {
                -pow_up(-x, n)
            }
        };
        Interval { lo: signed_pow(self.lo, false), hi: signed_pow(self.hi, true) }
    }
}

// 0 * inf is taken as 0: an infinite bound paired with an exact zero.
fn mul0<F: Scalar>(a: F, b: F) -> F {
    if a.is_zero() || b.is_zero() {
        F::zero()
    } else {
        a * b
    }
}

fn down<F: Scalar>(x: F) -> F {
    if x.is_infinite() { x } else { x.next_down() }
}

fn up<F: Scalar>(x: F) -> F {
    if x.is_infinite() { x } else { x.next_up() }
}

fn pow_up<F: Scalar>(x: F, n: u32) -> F {
    (1..n).fold(x, |acc, _| up(acc * x))
}

fn pow_down<F: Scalar>(x: F, n: u32) -> F {
    let r = (1..n).fold(x, |acc, _| down(acc * x));
    if r < F::zero() { F::zero() } else { r }
}

impl<F: Scalar> fmt::Display for Interval<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}__{:?}", self.lo, self.hi)
    }
}
