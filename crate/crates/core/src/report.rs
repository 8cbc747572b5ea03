//! Serialization helpers and output metadata.

use std::fmt::Display;

use num_rational::BigRational;
use serde::Serializer;

use crate::arith::fixed::ratio_to_decimal;

/// Fractional digits in decimal renderings of exact rationals.
pub const DECIMAL_DIGITS: usize = 30;

/// Exact rational as `"p/q"` (or `"p"`), never rounded.
pub fn ratio_string(x: &BigRational) -> String {
    if x.denom() == &1.into() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Truncated decimal of an exact rational.
pub fn decimal_string(x: &BigRational) -> String {
    ratio_to_decimal(x, DECIMAL_DIGITS)
}

pub fn ser_ratio<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_string(x))
}

pub fn ser_opt_ratio<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&ratio_string(v)),
        None => s.serialize_none(),
    }
}

pub fn ser_decimal<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&decimal_string(x))
}

pub fn ser_opt_decimal<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&decimal_string(v)),
        None => s.serialize_none(),
    }
}

pub fn ser_display<T: Display, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_opt_display<T: Display, S: Serializer>(x: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}
