//! Sup-norm shells of ℤ², primitive directions, and divisor arithmetic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{ser_display, ser_ratio};

/// Nonzero vector of ℤ². Ordered by [`TotalOrder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeVector {
    pub q1: i64,
    pub q2: i64,
}

impl LatticeVector {
    pub fn new(q1: i64, q2: i64) -> Result<Self> {
        if q1 == 0 && q2 == 0 {
            return Err(Error::InvalidArgument("lattice vector must be nonzero".into()));
        }
        Ok(LatticeVector { q1, q2 })
    }

    /// `max(|q₁|, |q₂|)`.
    pub fn norm(&self) -> u64 {
        self.q1.unsigned_abs().max(self.q2.unsigned_abs())
    }

    pub fn l1_norm(&self) -> u64 {
        self.q1.unsigned_abs() + self.q2.unsigned_abs()
    }

    pub fn gcd(&self) -> u64 {
        self.q1.unsigned_abs().gcd(&self.q2.unsigned_abs())
    }

    pub fn primitive(&self) -> LatticeVector {
        let g = self.gcd() as i64;
        LatticeVector {
            q1: self.q1 / g,
            q2: self.q2 / g,
        }
    }

    /// `(p, k)` with `self = k·p`, `p` primitive and its first nonzero
    /// coordinate positive.
    pub fn direction(&self) -> (LatticeVector, i64) {
        let p = self.primitive();
        let g = self.gcd() as i64;
        if p.q1 > 0 || (p.q1 == 0 && p.q2 > 0) {
            (p, g)
        } else {
            (p.neg(), -g)
        }
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector {
            q1: -self.q1,
            q2: -self.q2,
        }
    }

    pub fn scale(&self, k: i64) -> LatticeVector {
        LatticeVector {
            q1: self.q1 * k,
            q2: self.q2 * k,
        }
    }

    pub fn is_parallel(&self, other: &LatticeVector) -> bool {
        self.q1 as i128 * other.q2 as i128 == self.q2 as i128 * other.q1 as i128
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q1, self.q2)
    }
}

impl std::str::FromStr for LatticeVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = t
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected q1,q2, got {s:?}")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad coordinate in {s:?}")))
        };
        LatticeVector::new(parse(a)?, parse(b)?)
    }
}

impl Ord for LatticeVector {
    fn cmp(&self, other: &Self) -> Ordering {
        TotalOrder::cmp(self, other)
    }
}

impl PartialOrd for LatticeVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `(norm, q₁, q₂)` lexicographic order on ℤ² ∖ {0}.
///
/// Positions are 0-based: shell `n` occupies `(2n−1)² − 1 .. (2n+1)² − 1`.
pub struct TotalOrder;

impl TotalOrder {
    pub fn cmp(a: &LatticeVector, b: &LatticeVector) -> Ordering {
        (a.norm(), a.q1, a.q2).cmp(&(b.norm(), b.q1, b.q2))
    }

    pub fn shell_start(n: u64) -> u64 {
        assert!(n >= 1);
        (2 * n - 1) * (2 * n - 1) - 1
    }

    /// Position of `v`.
    pub fn index(v: &LatticeVector) -> u64 {
        let n = v.norm() as i64;
        let (q1, q2) = (v.q1, v.q2);
        let within = if q1 == -n {
            q2 + n
        } else if q1 < n {
            (2 * n + 1) + 2 * (q1 + n - 1) + i64::from(q2 == n)
        } else {
            (2 * n + 1) + 2 * (2 * n - 1) + q2 + n
        };
        Self::shell_start(n as u64) + within as u64
    }

    /// Vector at position `i`.
    pub fn nth(i: u64) -> LatticeVector {
        // largest n with (2n−1)² − 1 ≤ i
        let mut n = (((i + 1) as f64).sqrt() as u64 + 1) / 2;
        n = n.max(1);
        while Self::shell_start(n + 1) <= i {
            n += 1;
        }
        while Self::shell_start(n) > i {
            n -= 1;
        }
        let n_i = n as i64;
        let mut k = (i - Self::shell_start(n)) as i64;
        let side = 2 * n_i + 1;
        if k < side {
            return LatticeVector { q1: -n_i, q2: k - n_i };
        }
        k -= side;
        if k < 2 * (2 * n_i - 1) {
            let q1 = -n_i + 1 + k / 2;
            let q2 = if k % 2 == 0 { -n_i } else { n_i };
            return LatticeVector { q1, q2 };
        }
        k -= 2 * (2 * n_i - 1);
        LatticeVector { q1: n_i, q2: k - n_i }
    }
}

/// Every vector of sup-norm `n`, in [`TotalOrder`].
pub fn shell(n: u64) -> Vec<LatticeVector> {
    assert!(n >= 1, "shell index must be ≥ 1");
    let m = n as i64;
    let mut out = Vec::with_capacity(8 * n as usize);
    for q1 in -m..=m {
        if q1.abs() == m {
            out.extend((-m..=m).map(|q2| LatticeVector { q1, q2 }));
        } else {
            out.push(LatticeVector { q1, q2: -m });
            out.push(LatticeVector { q1, q2: m });
        }
    }
    out
}

/// `(2n+1)² − (2n−1)²`.
pub fn shell_size(n: u64) -> u64 {
    8 * n
}

/// The shell size used in the paper's main term.
pub fn shell_size_paper(n: u64) -> u64 {
    8 * n + 4
}

/// All `r` with `|r| = r_norm` parallel to `q`: `±(r_norm/(|q|/g))·p`.
pub fn parallel_class(q: &LatticeVector, r_norm: u64) -> Vec<LatticeVector> {
    let p = q.primitive();
    let pn = p.norm();
    if r_norm == 0 || r_norm % pn != 0 {
        return Vec::new();
    }
    let k = (r_norm / pn) as i64;
    let mut v = vec![p.scale(k), p.scale(-k)];
    v.sort();
    v
}

/// `gcd → count` over shell `n`, by enumeration.
pub fn gcd_histogram(n: u64) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for v in shell(n) {
        *h.entry(v.gcd()).or_insert(0) += 1;
    }
    h
}

/// Number of vectors with norm `q` and gcd `d`, by enumeration.
pub fn count_gcd_shell(q: u64, d: u64) -> Result<u64> {
    if d == 0 || q % d != 0 {
        return Err(Error::InvalidArgument(format!("{d} does not divide {q}")));
    }
    Ok(shell(q).iter().filter(|v| v.gcd() == d).count() as u64)
}

/// Enumerated gcd-shell count next to the `4q/d` bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdShellAudit {
    pub q: u64,
    pub d: u64,
    pub count: u64,
    pub bound: u64,
    pub within_bound: bool,
}

pub fn audit_gcd_shell(q: u64, d: u64) -> Result<GcdShellAudit> {
    let count = count_gcd_shell(q, d)?;
    let bound = 4 * q / d;
    Ok(GcdShellAudit {
        q,
        d,
        count,
        bound,
        within_bound: count <= bound,
    })
}

/// Prime factorization by trial division, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Number of positive divisors.
pub fn tau(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Euler's totient.
pub fn phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Positive divisors, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdPowerSum {
    pub q: u64,
    pub k: u32,
    #[serde(serialize_with = "crate::report::ser_opt_ratio")]
    pub cap: Option<BigRational>,
    #[serde(serialize_with = "ser_display")]
    pub sum: BigInt,
    /// `sum / q^k`.
    #[serde(serialize_with = "ser_ratio")]
    pub normalized: BigRational,
}

/// `∑_{r ≤ q, gcd(q,r) < q^cap} gcd(q,r)^k` as `∑_{d|q, d < q^cap} d^k φ(q/d)`.
pub fn gcd_power_sum(q: u64, k: u32, cap: Option<&BigRational>) -> Result<GcdPowerSum> {
    if q < 2 {
        return Err(Error::InvalidArgument("gcd_power_sum needs q ≥ 2".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be ≥ 1".into()));
    }
    let cap_parts = match cap {
        Some(c) => {
            let num = c.numer().to_u32();
            let den = c.denom().to_u32();
            match (num, den) {
                (Some(n), Some(d)) if *c > BigRational::zero() => Some((n, d)),
                _ => return Err(Error::InvalidArgument("cap must be a small positive rational".into())),
            }
        }
        None => None,
    };
    let qb = BigInt::from(q);
    let q_pow = cap_parts.map(|(num, _)| Pow::pow(&qb, num));
    let mut sum = BigInt::zero();
    for d in divisors(q) {
        let db = BigInt::from(d);
        if let (Some((_, den)), Some(qp)) = (cap_parts, q_pow.as_ref()) {
            // d < q^(num/den)  ⇔  d^den < q^num
            if Pow::pow(&db, den) >= *qp {
                continue;
            }
        }
        sum += Pow::pow(&db, k) * phi(q / d);
    }
    let normalized = BigRational::new(sum.clone(), Pow::pow(&qb, k));
    Ok(GcdPowerSum {
        q,
        k,
        cap: cap.cloned(),
        sum,
        normalized,
    })
}

/// `∑_{r < q} gcd(q,r)^k`: the `r = q` term removed.
pub fn gcd_power_sum_below(q: u64, k: u32) -> Result<BigInt> {
    let full = gcd_power_sum(q, k, None)?;
    Ok(full.sum - Pow::pow(&BigInt::from(q), k))
}

/// Product of the first `k` primes.
pub fn primorial(k: usize) -> u64 {
    let mut out = 1u64;
    let mut found = 0;
    let mut n = 2u64;
    while found < k {
        if factorize(n).len() == 1 && factorize(n)[0].1 == 1 {
            out *= n;
            found += 1;
        }
        n += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::ratio;
    use proptest::prelude::*;

    fn naive_gcd_sum(q: u64, k: u32) -> BigInt {
        (1..=q).map(|r| Pow::pow(BigInt::from(q.gcd(&r)), k)).sum()
    }

    #[test]
    fn shells_by_brute_force() {
        for n in 1..=200u64 {
            let m = n as i64;
            let mut brute: Vec<LatticeVector> = (-m..=m)
                .flat_map(|a| (-m..=m).map(move |b| LatticeVector { q1: a, q2: b }))
                .filter(|v| v.norm() == n)
                .collect();
            brute.sort();
            let s = shell(n);
            assert_eq!(s, brute);
            assert_eq!(s.len() as u64, (2 * n + 1).pow(2) - (2 * n - 1).pow(2));
            assert_eq!(s.len() as u64, shell_size(n));
        }
        assert_eq!(shell(1).len(), 8);
        assert_eq!(shell(2).len(), 16);
    }

    #[test]
    fn order_positions() {
        let mut i = 0u64;
        for n in 1..=30 {
            assert_eq!(TotalOrder::shell_start(n), i);
            for v in shell(n) {
                assert_eq!(TotalOrder::index(&v), i);
                assert_eq!(TotalOrder::nth(i), v);
                i += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn order_respects_norm(a in -300i64..300, b in -300i64..300, c in -300i64..300, d in -300i64..300) {
            prop_assume!((a, b) != (0, 0) && (c, d) != (0, 0));
            let u = LatticeVector::new(a, b).unwrap();
            let v = LatticeVector::new(c, d).unwrap();
            if u.norm() < v.norm() {
                prop_assert!(u < v);
            }
            prop_assert_eq!(u.cmp(&v) == Ordering::Equal, u == v);
            prop_assert_eq!(u.cmp(&v), TotalOrder::index(&u).cmp(&TotalOrder::index(&v)));
        }

        #[test]
        fn direction_decomposition(a in -1000i64..1000, b in -1000i64..1000) {
            prop_assume!((a, b) != (0, 0));
            let v = LatticeVector::new(a, b).unwrap();
            let (p, k) = v.direction();
            prop_assert_eq!(p.gcd(), 1);
            prop_assert_eq!(p.scale(k), v);
            prop_assert_eq!(k.unsigned_abs(), v.gcd());
            prop_assert_eq!(v.neg().direction().0, p);
        }
    }

    #[test]
    fn shell_before_next() {
        for n in 1..50 {
            let a = shell(n);
            let b = shell(n + 1);
            assert!(a.last().unwrap() < b.first().unwrap());
        }
    }

    #[test]
    fn parallel_classes() {
        let q = LatticeVector::new(2, 4).unwrap();
        assert_eq!(
            parallel_class(&q, 2),
            vec![LatticeVector::new(-1, -2).unwrap(), LatticeVector::new(1, 2).unwrap()]
        );
        assert!(parallel_class(&q, 3).is_empty());
        let axis = LatticeVector::new(1, 0).unwrap();
        assert_eq!(
            parallel_class(&axis, 7),
            vec![LatticeVector::new(-7, 0).unwrap(), LatticeVector::new(7, 0).unwrap()]
        );
    }

    #[test]
    fn gcd_shell_counts() {
        assert_eq!(count_gcd_shell(1, 1).unwrap(), 8);
        assert_eq!(count_gcd_shell(2, 2).unwrap(), 8);
        assert_eq!(count_gcd_shell(6, 6).unwrap(), 8);
        assert!(count_gcd_shell(6, 4).is_err());
        // q prime: everything but the 8 multiples of a unit vector
        assert_eq!(count_gcd_shell(7, 1).unwrap(), 8 * 7 - 8);
        for q in 1..=60u64 {
            let h = gcd_histogram(q);
            for d in divisors(q) {
                let expect = if d == q { 8 } else { 8 * phi(q / d) };
                assert_eq!(count_gcd_shell(q, d).unwrap(), expect, "q={q} d={d}");
                assert_eq!(*h.get(&d).unwrap_or(&0), expect);
            }
        }
        // the 4q/d bound fails whenever q/d is odd, e.g. q = d
        let a = audit_gcd_shell(6, 6).unwrap();
        assert_eq!((a.count, a.bound, a.within_bound), (8, 4, false));
        assert!(audit_gcd_shell(8, 1).unwrap().within_bound);
    }

    #[test]
    fn divisor_functions() {
        assert_eq!(tau(1), 1);
        assert_eq!(tau(12), 6);
        assert_eq!(tau(1 << 10), 11);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(phi(1), 1);
        assert_eq!(phi(12), 4);
        assert_eq!(phi(97), 96);
        for n in 1..500u64 {
            assert_eq!(tau(n), (1..=n).filter(|d| n % d == 0).count() as u64);
            assert_eq!(phi(n), (1..=n).filter(|r| n.gcd(r) == 1).count() as u64);
        }
    }

    #[test]
    fn gcd_sums() {
        assert_eq!(gcd_power_sum(6, 2, None).unwrap().sum, BigInt::from(55));
        assert_eq!(gcd_power_sum(6, 3, None).unwrap().sum, BigInt::from(261));
        assert_eq!(gcd_power_sum(13, 2, None).unwrap().sum, BigInt::from(12 + 169));
        assert!(gcd_power_sum(1, 2, None).is_err());
        for q in 2..=1000u64 {
            for k in 1..=3 {
                assert_eq!(gcd_power_sum(q, k, None).unwrap().sum, naive_gcd_sum(q, k));
            }
        }
    }

    #[test]
    fn capped_sum_matches_naive() {
        let cap = ratio(3, 4);
        for q in 2..=300u64 {
            let naive: BigInt = (1..=q)
                .map(|r| q.gcd(&r))
                .filter(|&g| BigInt::from(g).pow(4u32) < BigInt::from(q).pow(3u32))
                .map(|g| BigInt::from(g).pow(2u32))
                .sum();
            assert_eq!(gcd_power_sum(q, 2, Some(&cap)).unwrap().sum, naive, "q={q}");
        }
    }

    #[test]
    fn primorials() {
        assert_eq!(primorial(1), 2);
        assert_eq!(primorial(4), 210);
        assert_eq!(primorial(8), 9_699_690);
    }
}
