//! Scalar backends: exact rationals and binary floats.
//!
//! Every matrix, factor list and domain is generic over one backend, so
//! mixing backends is a compile error rather than a runtime one.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient arithmetic shared by the rational and float backends.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// Exact backends admit exact equality checks where float backends use
    /// tolerances.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact embedding of a finite binary float.
    fn from_f64(v: f64) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    /// Total order used for pivoting and max scans (deterministic for f64).
    fn cmp_total(&self, rhs: &Self) -> Ordering;
    fn to_f64(&self) -> f64;

    fn pow_u(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn max_val(a: Self, b: Self) -> Self {
        if a.cmp_total(&b) == Ordering::Less {
            b
        } else {
            a
        }
    }

    fn min_val(a: Self, b: Self) -> Self {
        if a.cmp_total(&b) == Ordering::Greater {
            b
        } else {
            a
        }
    }
}

impl Coeff for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_one(&self) -> bool {
        *self == 1.0
    }
    fn cmp_total(&self, rhs: &Self) -> Ordering {
        self.total_cmp(rhs)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coeff for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn cmp_total(&self, rhs: &Self) -> Ordering {
        self.cmp(rhs)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        <BigRational as Coeff>::from_ratio(n, d)
    }

    #[test]
    fn pow_u_matches_repeated_mul() {
        let x = q(3, 7);
        let mut acc = <BigRational as Coeff>::one();
        for _ in 0..5 {
            acc = Coeff::mul(&acc, &x);
        }
        assert_eq!(x.pow_u(5), acc);
        assert_eq!(2.0f64.pow_u(10), 1024.0);
        assert_eq!(2.0f64.pow_u(0), 1.0);
    }

    #[test]
    fn rational_inverse_and_abs() {
        let x = q(-2, 5);
        assert_eq!(Coeff::abs(&x), q(2, 5));
        assert_eq!(Coeff::inv(&x).unwrap(), q(-5, 2));
        assert!(Coeff::inv(&<BigRational as Coeff>::zero()).is_none());
    }
}
