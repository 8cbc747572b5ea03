use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fixed::{FixedPoint, MIN_SCALE_BITS};
use crate::error::{Error, Result};

/// Trial-division bound for square-factor extraction in the radicand.
const SQUARE_FREE_TRIAL_BOUND: u64 = 1 << 20;

/// Quadratic surd `(a + b·√d) / r`.
///
/// Normalized on construction: `r > 0`, `gcd(a, b, r) = 1`, square factors of
/// `d` folded into `b`. Radicands with a prime factor above 2^20 that occurs
/// squared are left as they are; this only affects very large `d` (for example
/// surds rebuilt from long continued fractions) and never the value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    a: BigInt,
    b: BigInt,
    r: BigInt,
    d: BigInt,
}

/// `floor(frac(x) · 2^scale)` together with whether `x·2^scale` was hit exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FracFloor {
    pub floor: BigInt,
    pub exact: bool,
}

impl QuadraticSurd {
    pub fn new(a: BigInt, b: BigInt, r: BigInt, d: BigInt) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::InvalidArgument("surd denominator r must be nonzero".into()));
        }
        if !d.is_positive() {
            return Err(Error::InvalidArgument("surd radicand d must be positive".into()));
        }
        let (square, free) = split_square_factor(&d);
        let mut s = QuadraticSurd {
            a,
            b: b * square,
            r,
            d: free,
        };
        if s.d.is_one() {
            // perfect square radicand: the value is rational
            s.a += &s.b;
            s.b = BigInt::zero();
        }
        if s.b.is_zero() {
            s.d = BigInt::from(2);
        }
        if s.r.is_negative() {
            s.a = -s.a;
            s.b = -s.b;
            s.r = -s.r;
        }
        let g = s.a.gcd(&s.b).gcd(&s.r);
        if !g.is_one() && !g.is_zero() {
            s.a /= &g;
            s.b /= &g;
            s.r /= &g;
        }
        Ok(s)
    }

    pub fn from_i64(a: i64, b: i64, r: i64, d: i64) -> Result<Self> {
        Self::new(a.into(), b.into(), r.into(), d.into())
    }

    /// `√n`.
    pub fn sqrt(n: u64) -> Result<Self> {
        Self::from_i64(0, 1, 1, n as i64)
    }

    /// `(1 + √5) / 2`.
    pub fn golden_ratio() -> Self {
        Self::from_i64(1, 1, 2, 5).expect("valid constant")
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn r(&self) -> &BigInt {
        &self.r
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_irrational(&self) -> bool {
        !self.b.is_zero()
    }

    pub fn neg(&self) -> Self {
        QuadraticSurd {
            a: -&self.a,
            b: -&self.b,
            r: self.r.clone(),
            d: self.d.clone(),
        }
    }

    /// Floor of `frac(q·value) · 2^scale`.
    ///
    /// Uses only integer square roots: `q·b·2^s·√d` is bracketed between
    /// `isqrt(d·(q·b·2^s)²)` and that plus one, and since the radicand is not a
    /// square the bracket is strict.
    pub fn frac_floor(&self, q: &BigInt, scale_bits: u32) -> FracFloor {
        let one = BigInt::one() << scale_bits;
        let qa = (q * &self.a) << scale_bits;
        let t = (q * &self.b) << scale_bits;
        if t.is_zero() {
            let num = qa;
            let (fl, rem) = num.div_mod_floor(&self.r);
            return FracFloor {
                floor: fl.mod_floor(&one),
                exact: rem.is_zero(),
            };
        }
        let m = (&self.d * &t * &t).sqrt();
        // q·γ·2^s·r ∈ (lower, lower + 1)
        let lower = if t.is_positive() { qa + m } else { qa - m - 1u32 };
        FracFloor {
            floor: lower.div_floor(&self.r).mod_floor(&one),
            exact: false,
        }
    }

    /// Minimal polynomial `A x² + B x + C` with coprime integer coefficients
    /// and `A > 0`.
    pub fn minimal_polynomial(&self) -> Option<(BigInt, BigInt, BigInt)> {
        if !self.is_irrational() {
            return None;
        }
        let a2 = &self.r * &self.r;
        let b1 = BigInt::from(-2) * &self.a * &self.r;
        let c0 = &self.a * &self.a - &self.b * &self.b * &self.d;
        let g = a2.gcd(&b1).gcd(&c0);
        Some((a2 / &g, b1 / &g, c0 / &g))
    }

    /// Integer `c` with `‖qγ‖ ≥ 1/(c·q)` for every `q ≥ 1`.
    ///
    /// From `|f(p/q)| ≥ 1/q²` for the minimal polynomial `f` and
    /// `|f'(ξ)| ≤ √disc + A/2` on the interval between `γ` and `p/q`:
    /// `c = ⌈√disc⌉ + ⌈A/2⌉`.
    pub fn analytic_liouville_constant(&self) -> Option<BigInt> {
        let (a, b, c) = self.minimal_polynomial()?;
        let disc = &b * &b - BigInt::from(4) * &a * &c;
        let root = disc.sqrt();
        let root_ceil = if &root * &root == disc { root } else { root + 1u32 };
        Some(root_ceil + (&a + 1u32) / 2u32)
    }

    pub fn to_f64(&self) -> f64 {
        let fl = self.frac_floor(&BigInt::one(), 64).floor;
        let int_part = self.integer_part();
        int_part.to_f64().unwrap_or(f64::NAN) + fl.to_f64().unwrap_or(0.0) / 2f64.powi(64)
    }

    /// `⌊value⌋`.
    pub fn integer_part(&self) -> BigInt {
        let s = (&self.d * &self.b * &self.b).sqrt();
        let lower = if self.b.is_positive() {
            &self.a + s
        } else if self.b.is_zero() {
            self.a.clone()
        } else {
            &self.a - s - 1u32
        };
        lower.div_floor(&self.r)
    }

    pub fn to_ratio_floor(&self, scale_bits: u32) -> BigRational {
        let f = self.frac_floor(&BigInt::one(), scale_bits).floor;
        BigRational::from_integer(self.integer_part())
            + BigRational::new(f, BigInt::one() << scale_bits)
    }
}

/// `qγ mod 1` with absolute error below `2^-scale_bits`.
///
/// Rejects scales below `64 + ⌈log₂(1 + |q|)⌉`.
pub fn surd_eval(gamma: &QuadraticSurd, q: &BigInt, scale_bits: u32) -> Result<FixedPoint> {
    let needed = MIN_SCALE_BITS as u64 + ceil_log2_one_plus(q);
    if (scale_bits as u64) < needed {
        return Err(Error::PrecisionRange(format!(
            "scale_bits {scale_bits} insufficient for q = {q}; need at least {needed}"
        )));
    }
    let ff = gamma.frac_floor(q, scale_bits);
    FixedPoint::new(ff.floor, scale_bits)
}

/// `⌈log₂(1 + |q|)⌉`.
pub fn ceil_log2_one_plus(q: &BigInt) -> u64 {
    let n: BigInt = q.abs() + 1u32;
    let bits = n.bits();
    if (&n & (&n - 1u32)).is_zero() {
        bits - 1
    } else {
        bits
    }
}

/// Returns `(s, f)` with `d = s²·f`; `f` is square-free whenever all prime
/// factors of `d` that occur squared are below the trial bound or the cofactor
/// is a perfect square.
fn split_square_factor(d: &BigInt) -> (BigInt, BigInt) {
    let mut rest = d.clone();
    let mut square = BigInt::one();
    let mut p: u64 = 2;
    while p <= SQUARE_FREE_TRIAL_BOUND {
        let pp = BigInt::from(p) * p;
        if pp > rest {
            break;
        }
        while (&rest % &pp).is_zero() {
            rest /= &pp;
            square *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let s = rest.sqrt();
    if &s * &s == rest && !rest.is_one() {
        square *= &s;
        rest = BigInt::one();
    }
    (square, rest)
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}*sqrt({}))/{}", self.a, self.b, self.d, self.r)
    }
}
