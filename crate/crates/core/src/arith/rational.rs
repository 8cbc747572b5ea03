use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Parses `"3"`, `"-3/7"`, `"0.125"` or `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut v = if scale >= 0 {
        BigRational::from_integer(digits * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(digits, Pow::pow(&ten, (-scale) as u32))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

pub fn floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &BigRational) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Smallest integer `t ≥ 0` with `t^k ≥ x` for rational `x ≥ 0`.
pub fn ceil_root(x: &BigRational, k: u32) -> BigInt {
    assert!(k >= 1);
    if !x.is_positive() {
        return BigInt::zero();
    }
    let n = ceil(x);
    let r = n.nth_root(k);
    if Pow::pow(&r, k) >= n {
        r
    } else {
        r + 1u32
    }
}

/// Largest integer `t ≥ 0` with `t^k ≤ x` for rational `x ≥ 0`.
pub fn floor_root(x: &BigRational, k: u32) -> BigInt {
    assert!(k >= 1);
    if !x.is_positive() {
        return BigInt::zero();
    }
    floor(x).nth_root(k)
}

pub fn pow(x: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// Rational `p/q` as `(p, q)` of machine integers, when it fits.
pub fn small_parts(x: &BigRational) -> Option<(i64, u32)> {
    use num_traits::ToPrimitive;
    Some((x.numer().to_i64()?, x.denom().to_u32()?))
}

pub fn min(a: &BigRational, b: &BigRational) -> BigRational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &BigRational, b: &BigRational) -> BigRational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rational("3/7").unwrap(), ratio(3, 7));
        assert_eq!(parse_rational(" -3 / 6 ").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("0.2").unwrap(), ratio(1, 5));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("2.5E1").unwrap(), int(25));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(ceil_root(&int(64), 3), BigInt::from(4));
        assert_eq!(ceil_root(&int(65), 3), BigInt::from(5));
        assert_eq!(ceil_root(&ratio(1, 2), 2), BigInt::from(1));
        assert_eq!(floor_root(&ratio(99, 1), 2), BigInt::from(9));
        assert_eq!(ceil(&ratio(-3, 2)), BigInt::from(-1));
        assert_eq!(floor(&ratio(-3, 2)), BigInt::from(-2));
    }
}
