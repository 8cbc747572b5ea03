use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};

use crate::arith::QuadraticSurd;
use crate::error::{Error, Result};

/// Simple continued fraction `[a₀; a₁, a₂, …]`.
///
/// `quotients` holds `a₁, a₂, …`. When `period` is set, the quotients from
/// index `period.start` (0-based into `quotients`) repeat with length
/// `period.len` forever and `quotients` stores exactly one copy of the
/// preperiod and the period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CFExpansion {
    integer_part: BigInt,
    quotients: Vec<BigInt>,
    period: Option<Period>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Period {
    pub start: usize,
    pub len: usize,
}

impl CFExpansion {
    pub fn finite(integer_part: BigInt, quotients: Vec<BigInt>) -> Result<Self> {
        check_positive(&quotients)?;
        Ok(CFExpansion {
            integer_part,
            quotients,
            period: None,
        })
    }

    pub fn periodic(integer_part: BigInt, preperiod: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidArgument("period must be nonempty".into()));
        }
        check_positive(&preperiod)?;
        check_positive(&period)?;
        let start = preperiod.len();
        let len = period.len();
        let mut quotients = preperiod;
        quotients.extend(period);
        Ok(CFExpansion {
            integer_part,
            quotients,
            period: Some(Period { start, len }),
        })
    }

    pub fn integer_part(&self) -> &BigInt {
        &self.integer_part
    }

    pub fn period(&self) -> Option<Period> {
        self.period
    }

    pub fn is_periodic(&self) -> bool {
        self.period.is_some()
    }

    pub fn preperiod(&self) -> &[BigInt] {
        match self.period {
            Some(p) => &self.quotients[..p.start],
            None => &self.quotients,
        }
    }

    pub fn period_terms(&self) -> &[BigInt] {
        match self.period {
            Some(p) => &self.quotients[p.start..],
            None => &[],
        }
    }

    /// Number of quotients `a₁, a₂, …` available; `None` when infinite.
    pub fn len(&self) -> Option<usize> {
        match self.period {
            Some(_) => None,
            None => Some(self.quotients.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `a_k` for `k ≥ 1`.
    pub fn quotient(&self, k: usize) -> Option<&BigInt> {
        assert!(k >= 1, "a_0 is the integer part");
        let i = k - 1;
        match self.period {
            Some(p) if i >= self.quotients.len() => {
                Some(&self.quotients[p.start + (i - p.start) % p.len])
            }
            _ => self.quotients.get(i),
        }
    }

    /// First `k` quotients `a₁ … a_k` (fewer if the expansion is finite).
    pub fn take(&self, k: usize) -> Vec<BigInt> {
        (1..=k).map_while(|i| self.quotient(i).cloned()).collect()
    }

    /// Convergents `p_k/q_k` for `k = 0, 1, …`.
    pub fn convergents(&self) -> Convergents<'_> {
        Convergents {
            cf: self,
            k: 0,
            p: (BigInt::one(), self.integer_part.clone()),
            q: (BigInt::zero(), BigInt::one()),
        }
    }

    /// Exact surd for an eventually periodic expansion.
    pub fn to_surd(&self) -> Result<QuadraticSurd> {
        let period = self
            .period
            .ok_or_else(|| Error::RationalShift("finite continued fraction is rational".into()))?;
        let tail = &self.quotients[period.start..];
        // x = [b₁; b₂, …, b_m, x]  ⇒  k x² + (k' − h) x − h' = 0
        let (h, h_prev, k, k_prev) = finite_convergent(&tail[0], &tail[1..]);
        let u = &h - &k_prev;
        let disc = (&k_prev - &h) * (&k_prev - &h) + BigInt::from(4) * &k * &h_prev;
        let v = BigInt::from(2) * &k;
        // γ = (p_n x + p_{n−1}) / (q_n x + q_{n−1}) over the preperiod
        let pre = &self.quotients[..period.start];
        let (p_n, p_prev, q_n, q_prev) = {
            let (mut p0, mut p1) = (BigInt::one(), self.integer_part.clone());
            let (mut q0, mut q1) = (BigInt::zero(), BigInt::one());
            for a in pre {
                let p2 = a * &p1 + &p0;
                let q2 = a * &q1 + &q0;
                p0 = std::mem::replace(&mut p1, p2);
                q0 = std::mem::replace(&mut q1, q2);
            }
            (p1, p0, q1, q0)
        };
        let big_a = &p_n * &u + &p_prev * &v;
        let big_b = &q_n * &u + &q_prev * &v;
        let num_rat = &big_a * &big_b - &p_n * &q_n * &disc;
        let num_irr = &p_n * &big_b - &big_a * &q_n;
        let den = &big_b * &big_b - &q_n * &q_n * &disc;
        QuadraticSurd::new(num_rat, num_irr, den, disc)
    }

    /// Parses `a0,a1,…,ak;b1,…,bm` (preperiod including `a₀`, then period).
    pub fn parse(body: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("continued fraction {body:?}: {m}"));
        let (pre, per) = body.split_once(';').unwrap_or((body, ""));
        let parse_list = |s: &str| -> Result<Vec<BigInt>> {
            s.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<BigInt>().map_err(|_| bad("bad integer")))
                .collect()
        };
        let pre = parse_list(pre)?;
        let per = parse_list(per)?;
        let (a0, rest) = pre.split_first().ok_or_else(|| bad("missing integer part"))?;
        if per.is_empty() {
            Self::finite(a0.clone(), rest.to_vec())
        } else {
            Self::periodic(a0.clone(), rest.to_vec(), per)
        }
    }
}

fn check_positive(q: &[BigInt]) -> Result<()> {
    if q.iter().any(|a| !a.is_positive()) {
        return Err(Error::InvalidArgument("partial quotients must be positive".into()));
    }
    Ok(())
}

/// `(h, h_prev, k, k_prev)` for `[first; rest…]`.
fn finite_convergent(first: &BigInt, rest: &[BigInt]) -> (BigInt, BigInt, BigInt, BigInt) {
    let (mut h0, mut h1) = (BigInt::one(), first.clone());
    let (mut k0, mut k1) = (BigInt::zero(), BigInt::one());
    for a in rest {
        let h2 = a * &h1 + &h0;
        let k2 = a * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
    }
    (h1, h0, k1, k0)
}

impl fmt::Display for CFExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[BigInt]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
        write!(f, "[{}", self.integer_part)?;
        let pre = self.preperiod();
        if !pre.is_empty() {
            write!(f, "; {}", join(pre))?;
        }
        if self.period.is_some() {
            let sep = if pre.is_empty() { ";" } else { "," };
            write!(f, "{sep} ({})", join(self.period_terms()))?;
        }
        write!(f, "]")
    }
}

pub struct Convergents<'a> {
    cf: &'a CFExpansion,
    k: usize,
    p: (BigInt, BigInt),
    q: (BigInt, BigInt),
}

impl Iterator for Convergents<'_> {
    type Item = (BigInt, BigInt);

    fn next(&mut self) -> Option<Self::Item> {
        if self.k > 0 {
            let a = self.cf.quotient(self.k)?.clone();
            let p2 = &a * &self.p.1 + &self.p.0;
            let q2 = &a * &self.q.1 + &self.q.0;
            self.p.0 = std::mem::replace(&mut self.p.1, p2);
            self.q.0 = std::mem::replace(&mut self.q.1, q2);
        }
        self.k += 1;
        Some((self.p.1.clone(), self.q.1.clone()))
    }
}

/// Exact expansion of an irrational quadratic surd with `k` quotients; the
/// period is detected and recorded.
pub fn cf_expand(gamma: &QuadraticSurd, k: usize) -> Result<CFExpansion> {
    if !gamma.is_irrational() {
        return Err(Error::RationalShift(format!("{gamma} is rational")));
    }
    // (P + √D)/Q with Q | D − P²
    let d_full = gamma.d() * gamma.b() * gamma.b();
    let (mut p, mut q) = if gamma.b().is_positive() {
        (gamma.a().clone(), gamma.r().clone())
    } else {
        (-gamma.a(), -gamma.r())
    };
    let mut d = d_full;
    if !((&d - &p * &p) % &q).is_zero() {
        let qa = q.abs();
        p *= &qa;
        d *= &q * &q;
        q *= &qa;
    }
    let s = d.sqrt();
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut terms: Vec<BigInt> = Vec::new();
    let mut integer_part = None;
    let mut idx = 0usize;
    loop {
        if let Some(&first) = seen.get(&(p.clone(), q.clone())) {
            let start = first;
            let len = idx - first;
            // quotients are indexed from 1; terms[i] = a_{i+1}
            let pre = terms[..start - 1].to_vec();
            let per = terms[start - 1..start - 1 + len].to_vec();
            let a0 = integer_part.expect("state 0 seen");
            return CFExpansion::periodic(a0, pre, per);
        }
        if idx > k && idx > 4 * (k + 16) {
            // long period beyond the request: return the prefix
            let a0 = integer_part.expect("state 0 seen");
            return CFExpansion::finite(a0, terms[..k].to_vec());
        }
        if idx > 0 {
            seen.insert((p.clone(), q.clone()), idx);
        }
        let a = if q.is_positive() {
            (&p + &s).div_floor(&q)
        } else {
            (&p + &s + 1u32).div_floor(&q)
        };
        let p_next = &a * &q - &p;
        let q_next = (&d - &p_next * &p_next) / &q;
        if idx == 0 {
            integer_part = Some(a);
        } else {
            terms.push(a);
        }
        p = p_next;
        q = q_next;
        idx += 1;
    }
}

/// Test number with doubly exponential partial quotients.
///
/// `[0; 2, a₂, …, a_levels, 1, 1, 1, …]` with
/// `a_{k+1} = 2^64 · q_k^(k+8)` for `1 ≤ k < levels`. The level-`k`
/// convergent `q_k` then satisfies `q_k^η ‖q_k γ‖ < 2^-64` for every
/// `η ≤ k + 9`, so no witness with `c ≤ 2^64` and such `η` exists.
pub fn make_liouville(levels: usize) -> Result<CFExpansion> {
    if levels < 1 {
        return Err(Error::InvalidArgument("levels must be ≥ 1".into()));
    }
    let mut quotients = vec![BigInt::from(2u32)];
    let (mut q_prev, mut q_cur) = (BigInt::one(), BigInt::from(2u32));
    for k in 1..levels {
        let a: BigInt = Pow::pow(&q_cur, (k + 8) as u32) << 64u32;
        let q_next = &a * &q_cur + &q_prev;
        quotients.push(a);
        q_prev = std::mem::replace(&mut q_cur, q_next);
    }
    CFExpansion::periodic(BigInt::zero(), quotients, vec![BigInt::one()])
}
