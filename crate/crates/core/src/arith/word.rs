//! Fixed-width torus values for hot loops.
//!
//! A `TorusWord<N>` holds `x mod 1` as an `N·64`-bit unsigned fraction. All
//! arithmetic wraps, which is exactly reduction modulo 1, so integer multiples
//! of a dyadic point stay exact.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusWord<const N: usize> {
    // little-endian limbs
    limbs: [u64; N],
}

impl<const N: usize> TorusWord<N> {
    pub const BITS: u32 = 64 * N as u32;

    pub const ZERO: Self = TorusWord { limbs: [0; N] };

    /// Reduces `mantissa mod 2^(64N)`; callers pass numerators already scaled to `64N` bits.
    pub fn from_bigint(mantissa: &BigInt) -> Self {
        let modulus = BigInt::one() << Self::BITS;
        let m = mantissa.mod_floor(&modulus);
        let digits = m.to_biguint().expect("nonnegative").to_u64_digits();
        let mut limbs = [0u64; N];
        for (slot, d) in limbs.iter_mut().zip(digits) {
            *slot = d;
        }
        TorusWord { limbs }
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut out = BigUint::from(0u32);
        for &l in self.limbs.iter().rev() {
            out = (out << 64u32) + l;
        }
        out
    }

    /// `2^(64N - 1)`, the value 1/2.
    pub fn half() -> Self {
        let mut limbs = [0u64; N];
        limbs[N - 1] = 1 << 63;
        TorusWord { limbs }
    }

    #[inline]
    pub fn wrapping_add(&self, rhs: &Self) -> Self {
        let mut out = [0u64; N];
        let mut carry = false;
        for i in 0..N {
            let (s1, c1) = self.limbs[i].overflowing_add(rhs.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            out[i] = s2;
            carry = c1 | c2;
        }
        TorusWord { limbs: out }
    }

    #[inline]
    pub fn wrapping_sub(&self, rhs: &Self) -> Self {
        let mut out = [0u64; N];
        let mut borrow = false;
        for i in 0..N {
            let (s1, b1) = self.limbs[i].overflowing_sub(rhs.limbs[i]);
            let (s2, b2) = s1.overflowing_sub(borrow as u64);
            out[i] = s2;
            borrow = b1 | b2;
        }
        TorusWord { limbs: out }
    }

    #[inline]
    pub fn wrapping_neg(&self) -> Self {
        Self::ZERO.wrapping_sub(self)
    }

    /// Subtracts one unit in the last place.
    #[inline]
    pub fn dec_ulp(&self) -> Self {
        let mut one = [0u64; N];
        one[0] = 1;
        self.wrapping_sub(&TorusWord { limbs: one })
    }

    #[inline]
    pub fn wrapping_mul_u64(&self, k: u64) -> Self {
        let mut out = [0u64; N];
        let mut carry: u128 = 0;
        for i in 0..N {
            let p = self.limbs[i] as u128 * k as u128 + carry;
            out[i] = p as u64;
            carry = p >> 64;
        }
        TorusWord { limbs: out }
    }

    #[inline]
    pub fn wrapping_mul_i64(&self, k: i64) -> Self {
        let m = self.wrapping_mul_u64(k.unsigned_abs());
        if k < 0 {
            m.wrapping_neg()
        } else {
            m
        }
    }
}

impl<const N: usize> Ord for TorusWord<N> {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..N).rev() {
            match self.limbs[i].cmp(&other.limbs[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl<const N: usize> PartialOrd for TorusWord<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
