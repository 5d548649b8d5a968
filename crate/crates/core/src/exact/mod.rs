//! Exact scalar arithmetic and exact integer linear algebra.

pub mod cyclotomic;
pub mod mat;
pub mod poly;
pub mod scalar;
pub mod snf;

use num_traits::{One, Zero};

pub use cyclotomic::CycInt;
pub use mat::{IntMat, RatMat};
pub use poly::{berkowitz_charpoly, MonicPoly};
pub use scalar::Scalar;
pub use snf::{snf, snf_rect, SnfDecomposition};

/// Arbitrary-precision integer.
pub type Int = num_bigint::BigInt;
/// Arbitrary-precision rational, always normalized (positive denominator,
/// gcd(num, den) = 1).
pub type Rat = num_rational::BigRational;

/// Commutative ring with exact arithmetic, as needed by the division-free
/// characteristic polynomial and generic matrix code.
pub trait Ring: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Ring for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Ring for Int {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Integer-valued rational test.
pub fn rat_is_integer(x: &Rat) -> bool {
    x.is_integer()
}

/// `a/b` as an exact rational.
pub fn rat(a: i64, b: i64) -> Rat {
    Rat::new(Int::from(a), Int::from(b))
}

/// Integer as a rational.
pub fn rat_int(a: i64) -> Rat {
    Rat::from_integer(Int::from(a))
}
