//! Integer backends shared by exact routines that run on a common denominator.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub trait ExactInt:
    Clone + Ord + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn try_from_bigint(v: &BigInt) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
    fn div_floor(&self, rhs: &Self) -> Self;
    fn mod_floor(&self, rhs: &Self) -> Self;
    fn abs(&self) -> Self;
    fn zero() -> Self {
        Self::from_i64(0)
    }
}

impl ExactInt for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn try_from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn div_floor(&self, rhs: &Self) -> Self {
        Integer::div_floor(self, rhs)
    }
    fn mod_floor(&self, rhs: &Self) -> Self {
        Integer::mod_floor(self, rhs)
    }
    fn abs(&self) -> Self {
        i128::abs(*self)
    }
}

impl ExactInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn try_from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn div_floor(&self, rhs: &Self) -> Self {
        Integer::div_floor(self, rhs)
    }
    fn mod_floor(&self, rhs: &Self) -> Self {
        Integer::mod_floor(self, rhs)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
}
