//! Exact non-negative dyadic rationals `numerator / 2^exponent`.
//!
//! Every probability produced by the tree-code analysis is a finite sum of
//! products of `2^-t` and `1 - 2^-t`, so this representation is closed under all
//! the operations the analyzer needs and lets normalisation checks be exact.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// A non-negative rational whose denominator is a power of two.
///
/// Values are kept in lowest terms (odd numerator unless the exponent is zero),
/// so structural equality is numeric equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigUint,
    exponent: u32,
}

impl Dyadic {
    pub fn new(numerator: BigUint, exponent: u32) -> Self {
        let mut d = Dyadic {
            numerator,
            exponent,
        };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic {
            numerator: BigUint::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            numerator: BigUint::one(),
            exponent: 0,
        }
    }

    pub fn from_integer(value: BigUint) -> Self {
        Dyadic::new(value, 0)
    }

    /// `2^-t`, the function `g(t)` of the analysis.
    pub fn pow2_neg(t: u32) -> Self {
        Dyadic {
            numerator: BigUint::one(),
            exponent: t,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    /// Exponent of the power-of-two denominator.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0 && self.numerator.is_one()
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Dyadic) -> Option<Dyadic> {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        if a < b {
            None
        } else {
            Some(Dyadic::new(a - b, e))
        }
    }

    /// `1 - self`.
    ///
    /// # Panics
    ///
    /// Panics if `self > 1`.
    pub fn complement(&self) -> Dyadic {
        Dyadic::one()
            .checked_sub(self)
            .expect("complement of a dyadic greater than one")
    }

    /// Scales by `2^-t`.
    pub fn shr(&self, t: u32) -> Dyadic {
        Dyadic::new(self.numerator.clone(), self.exponent + t)
    }

    /// Nearest-ish `f64`; exact whenever the numerator fits in 53 bits.
    pub fn to_f64(&self) -> f64 {
        if self.numerator.is_zero() {
            return 0.0;
        }
        let bits = self.numerator.bits();
        let (mantissa, shift) = if bits > 64 {
            let drop = bits - 64;
            ((&self.numerator >> drop).to_u64().unwrap(), drop as i64)
        } else {
            (self.numerator.to_u64().unwrap(), 0)
        };
        let e = shift - self.exponent as i64;
        scale_pow2(mantissa as f64, e)
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0);
        let strip = tz.min(self.exponent as u64) as u32;
        if strip > 0 {
            self.numerator >>= strip;
            self.exponent -= strip;
        }
    }
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    // powi saturates beyond the f64 exponent range, so step in chunks
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    x * 2f64.powi(e as i32)
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        a.cmp(&b)
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &rhs.numerator << (e - rhs.exponent);
        Dyadic::new(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(
            &self.numerator * &rhs.numerator,
            self.exponent + rhs.exponent,
        )
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl MulAssign<&Dyadic> for Dyadic {
    fn mul_assign(&mut self, rhs: &Dyadic) {
        *self = &*self * rhs;
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl Product for Dyadic {
    fn product<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::one(), |acc, x| &acc * &x)
    }
}
