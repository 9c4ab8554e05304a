use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact rational number, always reduced with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        ExactRational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        ExactRational(BigRational::new(numer, denom))
    }

    pub fn integer(value: i64) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    /// `1 / value`; `value` must be nonzero.
    pub fn reciprocal_of(value: u128) -> Self {
        assert!(value != 0, "reciprocal of zero");
        ExactRational(BigRational::new(BigInt::one(), BigInt::from(value)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for ExactRational {
    fn from(value: BigRational) -> Self {
        ExactRational(value)
    }
}

impl Add for ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: Self) -> Self {
        ExactRational(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a ExactRational> for ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: &'a ExactRational) -> Self {
        ExactRational(self.0 + &rhs.0)
    }
}

impl std::ops::Mul for ExactRational {
    type Output = ExactRational;
    fn mul(self, rhs: Self) -> Self {
        ExactRational(self.0 * rhs.0)
    }
}

impl Sum for ExactRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExactRational::zero(), |a, b| a + b)
    }
}

/// Always `p/q`, including integers (`2/1`).
impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}
