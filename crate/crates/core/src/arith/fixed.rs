use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Smallest scale a [`FixedPoint`] may carry.
pub const MIN_SCALE_BITS: u32 = 64;

/// Default fractional precision for torus coordinates and shifts.
pub const DEFAULT_SCALE_BITS: u32 = 192;

/// Binary fixed-point number `mantissa / 2^scale_bits` with an unbounded mantissa.
///
/// Mixed-scale arithmetic promotes to the larger scale, which is exact. Going
/// down in scale is only possible through [`FixedPoint::floor_to_scale`].
#[derive(Clone, Debug)]
pub struct FixedPoint {
    mantissa: BigInt,
    scale_bits: u32,
}

impl FixedPoint {
    pub fn new(mantissa: BigInt, scale_bits: u32) -> Result<Self> {
        if scale_bits < MIN_SCALE_BITS {
            return Err(Error::PrecisionRange(format!(
                "scale_bits {scale_bits} below minimum {MIN_SCALE_BITS}"
            )));
        }
        Ok(FixedPoint {
            mantissa,
            scale_bits,
        })
    }

    pub(crate) fn from_parts(mantissa: BigInt, scale_bits: u32) -> Self {
        debug_assert!(scale_bits >= MIN_SCALE_BITS);
        FixedPoint {
            mantissa,
            scale_bits,
        }
    }

    pub fn zero(scale_bits: u32) -> Result<Self> {
        Self::new(BigInt::zero(), scale_bits)
    }

    pub fn from_integer(value: i64, scale_bits: u32) -> Result<Self> {
        Self::new(BigInt::from(value) << scale_bits, scale_bits)
    }

    /// Largest fixed-point value at `scale_bits` that does not exceed `value`.
    pub fn from_ratio_floor(value: &BigRational, scale_bits: u32) -> Result<Self> {
        let scaled = value.numer() << scale_bits;
        Self::new(scaled.div_floor(value.denom()), scale_bits)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale_bits(&self) -> u32 {
        self.scale_bits
    }

    /// Same value at a finer scale; exact.
    pub fn upscale(&self, scale_bits: u32) -> Self {
        assert!(scale_bits >= self.scale_bits, "upscale cannot reduce precision");
        FixedPoint {
            mantissa: &self.mantissa << (scale_bits - self.scale_bits),
            scale_bits,
        }
    }

    /// Rounds toward negative infinity onto a coarser (or equal) scale.
    pub fn floor_to_scale(&self, scale_bits: u32) -> Result<Self> {
        if scale_bits >= self.scale_bits {
            return Ok(self.upscale(scale_bits));
        }
        Self::new(&self.mantissa >> (self.scale_bits - scale_bits), scale_bits)
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.scale_bits)
    }

    /// Lossy conversion for report formatting only.
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.to_ratio())
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        FixedPoint {
            mantissa: &self.mantissa * k,
            scale_bits: self.scale_bits,
        }
    }

    /// Representative of `self mod 1` in `[0, 1)`.
    pub fn frac(&self) -> Self {
        let one = BigInt::one() << self.scale_bits;
        FixedPoint {
            mantissa: self.mantissa.mod_floor(&one),
            scale_bits: self.scale_bits,
        }
    }

    /// Distance to the nearest integer, exact at the operand's scale.
    pub fn dist_nearest_int(&self) -> Self {
        let one = BigInt::one() << self.scale_bits;
        let m = self.mantissa.mod_floor(&one);
        let other = &one - &m;
        FixedPoint {
            mantissa: if m <= other { m } else { other },
            scale_bits: self.scale_bits,
        }
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let s = self.scale_bits.max(other.scale_bits);
        (
            &self.mantissa << (s - self.scale_bits),
            &other.mantissa << (s - other.scale_bits),
            s,
        )
    }
}

/// Free-function form of [`FixedPoint::dist_nearest_int`].
pub fn dist_nearest_int(x: &FixedPoint) -> FixedPoint {
    x.dist_nearest_int()
}

impl PartialEq for FixedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FixedPoint {}

impl PartialOrd for FixedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl Add for &FixedPoint {
    type Output = FixedPoint;
    fn add(self, rhs: &FixedPoint) -> FixedPoint {
        let (a, b, s) = self.aligned(rhs);
        FixedPoint::from_parts(a + b, s)
    }
}

impl Sub for &FixedPoint {
    type Output = FixedPoint;
    fn sub(self, rhs: &FixedPoint) -> FixedPoint {
        let (a, b, s) = self.aligned(rhs);
        FixedPoint::from_parts(a - b, s)
    }
}

impl Neg for &FixedPoint {
    type Output = FixedPoint;
    fn neg(self) -> FixedPoint {
        FixedPoint::from_parts(-&self.mantissa, self.scale_bits)
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        f.write_str(&ratio_to_decimal(&self.to_ratio(), digits))
    }
}

/// Truncated decimal expansion (toward zero) with `digits` fractional digits.
pub fn ratio_to_decimal(x: &BigRational, digits: usize) -> String {
    let neg = x.is_negative();
    let num = x.numer().abs();
    let den = x.denom().clone();
    let (int, mut rem) = num.div_rem(&den);
    let mut out = String::new();
    if neg && !(int.is_zero() && rem.is_zero()) {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if digits > 0 {
        out.push('.');
        let ten = BigInt::from(10u32);
        for _ in 0..digits {
            rem *= &ten;
            let (d, r) = rem.div_rem(&den);
            out.push_str(&d.to_string());
            rem = r;
        }
    }
    out
}

/// Lossy; for reports and plots only.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both sides down to f64 range.
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift_n = (nb - 900).max(0) as usize;
    let shift_d = (db - 900).max(0) as usize;
    let n = (x.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (x.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(num: i64, den_pow: u32) -> FixedPoint {
        // num / 2^den_pow, expressed at scale 128
        FixedPoint::new(BigInt::from(num) << (128 - den_pow), 128).unwrap()
    }

    #[test]
    fn dist_examples() {
        assert_eq!(fp(1, 2).dist_nearest_int(), fp(1, 2));
        assert_eq!(fp(15, 2).dist_nearest_int(), fp(1, 2));
        assert_eq!(fp(1, 1).dist_nearest_int(), fp(1, 1));
        assert_eq!(fp(-1, 2).dist_nearest_int(), fp(1, 2));
    }

    #[test]
    fn rejects_small_scale() {
        assert!(FixedPoint::new(BigInt::one(), 32).is_err());
    }

    #[test]
    fn mixed_scale_arithmetic_promotes() {
        let a = FixedPoint::new(BigInt::from(3), 64).unwrap();
        let b = FixedPoint::new(BigInt::from(5), 128).unwrap();
        let s = &a + &b;
        assert_eq!(s.scale_bits(), 128);
        assert_eq!(s.to_ratio(), a.to_ratio() + b.to_ratio());
        let d = &a - &b;
        assert_eq!(d.to_ratio(), a.to_ratio() - b.to_ratio());
    }

    #[test]
    fn floor_to_scale_rounds_down() {
        let x = FixedPoint::new(BigInt::from(-3), 128).unwrap();
        let y = x.floor_to_scale(64).unwrap();
        assert!(y <= x);
        assert_eq!(y.mantissa(), &BigInt::from(-1));
    }

    #[test]
    fn decimal_rendering() {
        let r = BigRational::new(BigInt::from(-1), BigInt::from(8));
        assert_eq!(ratio_to_decimal(&r, 4), "-0.1250");
        assert_eq!(format!("{:.3}", fp(3, 2)), "0.750");
    }
}
