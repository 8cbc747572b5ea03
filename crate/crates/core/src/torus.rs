//! Measures and pairwise overlaps of the sets `A(d,t) ⊂ T` and `A_q ⊂ T²`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::exact::ExactInt;
use crate::arith::rational::{self, ratio};
use crate::arith::FixedPoint;
use crate::error::{Error, Result};
use crate::gamma::{vanish_threshold, IrrationalShift, NonLiouvilleWitness};
use crate::lattice::LatticeVector;
use crate::psi::ApproxFunction;
use crate::report::{ser_display, ser_ratio};

fn frac(x: &BigRational) -> BigRational {
    x - BigRational::from_integer(rational::floor(x))
}

/// `{α ∈ T : ‖dα − shift‖ ≤ t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusSet1D {
    d: u64,
    shift: BigRational,
    t: BigRational,
}

impl TorusSet1D {
    pub fn new(d: u64, shift: BigRational, t: BigRational) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("frequency d must be ≥ 1".into()));
        }
        if t.is_negative() || t > ratio(1, 2) {
            return Err(Error::InvalidArgument(format!("radius {t} outside [0, 1/2]")));
        }
        Ok(TorusSet1D { d, shift, t })
    }

    pub fn with_fixed_shift(d: u64, shift: &FixedPoint, t: BigRational) -> Result<Self> {
        Self::new(d, shift.to_ratio(), t)
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn shift(&self) -> &BigRational {
        &self.shift
    }

    pub fn t(&self) -> &BigRational {
        &self.t
    }

    pub fn measure(&self) -> BigRational {
        BigRational::from_integer(2.into()) * &self.t
    }

    pub fn contains(&self, alpha: &BigRational) -> bool {
        let x = frac(&(alpha * BigRational::from_integer(self.d.into()) - &self.shift));
        let dist = rational::min(&x, &(BigRational::one() - &x));
        dist <= self.t
    }

    /// The `d` arcs `[(shift + a − t)/d, (shift + a + t)/d]`, `a = 0 … d−1`.
    pub fn arcs(&self) -> Vec<(BigRational, BigRational)> {
        let d = BigRational::from_integer(self.d.into());
        let s = frac(&self.shift);
        (0..self.d)
            .map(|a| {
                let c = &s + BigRational::from_integer(a.into());
                ((&c - &self.t) / &d, (&c + &self.t) / &d)
            })
            .collect()
    }
}

/// `{α ∈ T² : ‖q·α − shift‖ ≤ radius}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusSet2D {
    q: LatticeVector,
    shift: BigRational,
    radius: BigRational,
}

impl TorusSet2D {
    pub fn new(q: LatticeVector, shift: BigRational, radius: BigRational) -> Result<Self> {
        if radius.is_negative() || radius > ratio(1, 2) {
            return Err(Error::InvalidArgument(format!("radius {radius} outside [0, 1/2]")));
        }
        Ok(TorusSet2D { q, shift, radius })
    }

    pub fn q(&self) -> &LatticeVector {
        &self.q
    }

    pub fn measure(&self) -> BigRational {
        BigRational::from_integer(2.into()) * &self.radius
    }

    pub fn contains(&self, a1: &BigRational, a2: &BigRational) -> bool {
        let v = a1 * BigRational::from_integer(self.q.q1.into())
            + a2 * BigRational::from_integer(self.q.q2.into())
            - &self.shift;
        let x = frac(&v);
        rational::min(&x, &(BigRational::one() - &x)) <= self.radius
    }

    /// The 1-D pair `(d, s·shift)` with `A_q = T_p^{-1} A(d, radius)`.
    pub fn reduce(&self) -> (LatticeVector, TorusSet1D) {
        let (p, k) = self.q.direction();
        let shift = if k < 0 { -&self.shift } else { self.shift.clone() };
        let set = TorusSet1D {
            d: k.unsigned_abs(),
            shift,
            t: self.radius.clone(),
        };
        (p, set)
    }
}

/// Parameters of the weight function for a pair `A(d,t₁)`, `A(e,t₂)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapGeometry {
    #[serde(serialize_with = "ser_ratio")]
    pub delta: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub big_delta: BigRational,
    pub g: u64,
    #[serde(serialize_with = "ser_display")]
    pub l: BigInt,
    /// `σ = (e·shift₁ − d·shift₂)/g`; arc centers differ by `(c + σ)/L`.
    #[serde(serialize_with = "ser_ratio")]
    pub shift_offset: BigRational,
}

impl OverlapGeometry {
    pub fn new(a: &TorusSet1D, b: &TorusSet1D) -> Self {
        let d = BigRational::from_integer(a.d.into());
        let e = BigRational::from_integer(b.d.into());
        let h1 = &a.t / &d;
        let h2 = &b.t / &e;
        let g = a.d.gcd(&b.d);
        let l = BigInt::from(a.d) * BigInt::from(b.d) / BigInt::from(g);
        let shift_offset = (&e * &a.shift - &d * &b.shift) / BigRational::from_integer(g.into());
        OverlapGeometry {
            delta: rational::min(&h1, &h2),
            big_delta: rational::max(&h1, &h2),
            g,
            l,
            shift_offset,
        }
    }
}

/// `2δ` on `|y| ≤ Δ−δ`, `Δ+δ−|y|` up to `Δ+δ`, zero beyond.
pub fn weight_w(y: &BigRational, geom: &OverlapGeometry) -> BigRational {
    let ay = y.abs();
    let inner = &geom.big_delta - &geom.delta;
    let outer = &geom.big_delta + &geom.delta;
    if ay <= inner {
        BigRational::from_integer(2.into()) * &geom.delta
    } else if ay <= outer {
        outer - ay
    } else {
        BigRational::zero()
    }
}

/// `∫ w` by exact trapezoids over the breakpoints of `w`.
pub fn weight_integral(geom: &OverlapGeometry) -> BigRational {
    let inner = &geom.big_delta - &geom.delta;
    let outer = &geom.big_delta + &geom.delta;
    let pts = [-outer.clone(), -inner.clone(), inner, outer];
    let half = ratio(1, 2);
    pts.windows(2)
        .map(|w| (&w[1] - &w[0]) * (weight_w(&w[0], geom) + weight_w(&w[1], geom)) * &half)
        .sum()
}

/// Two sets on a common denominator `n`: shifts in `[0, n)`, radii.
struct Scaled {
    n: BigInt,
    s1: BigInt,
    s2: BigInt,
    t1: BigInt,
    t2: BigInt,
}

impl Scaled {
    fn new(a: &TorusSet1D, b: &TorusSet1D) -> Scaled {
        let f1 = frac(&a.shift);
        let f2 = frac(&b.shift);
        let n = [f1.denom(), f2.denom(), a.t.denom(), b.t.denom()]
            .into_iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x));
        let at = |x: &BigRational| x.numer() * (&n / x.denom());
        Scaled {
            s1: at(&f1),
            s2: at(&f2),
            t1: at(&a.t),
            t2: at(&b.t),
            n,
        }
    }

    /// Whether the `i128` backend is safe for frequencies `d`, `e`.
    fn fits_i128(&self, d: u64, e: u64) -> bool {
        let bits = |x: u64| 64 - x.leading_zeros() as u64;
        self.n.bits() + 2 * (bits(d) + bits(e)) + 12 <= 126
    }

    fn run<R>(
        &self,
        d: u64,
        e: u64,
        small: impl FnOnce([i128; 5]) -> R,
        big: impl FnOnce([BigInt; 5]) -> R,
    ) -> R {
        if self.fits_i128(d, e) {
            let c = |x: &BigInt| x.to_i128().expect("checked width");
            small([c(&self.n), c(&self.s1), c(&self.s2), c(&self.t1), c(&self.t2)])
        } else {
            big([
                self.n.clone(),
                self.s1.clone(),
                self.s2.clone(),
                self.t1.clone(),
                self.t2.clone(),
            ])
        }
    }
}

/// `g·∑_c W(eS₁ − dS₂ + gNc)` with `W` the weight function in units of `1/(Nde)`.
fn overlap_units<T: ExactInt>(d: u64, e: u64, [n, s1, s2, t1, t2]: [T; 5]) -> T {
    let g = T::from_i64(d.gcd(&e) as i64);
    let (dd, ee) = (T::from_i64(d as i64), T::from_i64(e as i64));
    let h1 = t1 * ee.clone();
    let h2 = t2 * dd.clone();
    let small = h1.clone().min(h2.clone());
    let reach = h1 + h2;
    let flat = small.clone() + small;
    let step = g.clone() * n;
    let y0 = ee * s1 - dd * s2;
    // first c with y0 + c·step ≥ −reach
    let c_lo = -(reach.clone() + y0.clone()).div_floor(&step);
    let mut y = y0 + c_lo * step.clone();
    let mut sum = T::zero();
    while y <= reach {
        let w = (reach.clone() - y.abs()).min(flat.clone());
        if w > T::zero() {
            sum = sum + w;
        }
        y = y + step.clone();
    }
    g * sum
}

/// Exact `λ₁(A ∩ B)` from the residue-class sum of the weight function.
///
/// Only residues inside the support of `w` are visited.
pub fn overlap_exact_1d(a: &TorusSet1D, b: &TorusSet1D) -> BigRational {
    let sc = Scaled::new(a, b);
    let num = sc.run(
        a.d,
        b.d,
        |v| overlap_units::<i128>(a.d, b.d, v).to_bigint(),
        |v| overlap_units::<BigInt>(a.d, b.d, v),
    );
    BigRational::new(num, &sc.n * BigInt::from(a.d) * BigInt::from(b.d))
}

/// Union of closed arcs on a circle of length `u`, as sorted disjoint intervals.
fn arc_union<T: ExactInt>(arcs: Vec<(T, T)>, u: &T) -> Vec<(T, T)> {
    let mut pieces = Vec::with_capacity(arcs.len() + 1);
    for (lo, hi) in arcs {
        let len = hi - lo.clone();
        if len >= *u {
            return vec![(T::zero(), u.clone())];
        }
        let start = lo.mod_floor(u);
        let end = start.clone() + len;
        if end > *u {
            pieces.push((start, u.clone()));
            pieces.push((T::zero(), end - u.clone()));
        } else {
            pieces.push((start, end));
        }
    }
    pieces.sort();
    let mut out: Vec<(T, T)> = Vec::with_capacity(pieces.len());
    for (lo, hi) in pieces {
        match out.last_mut() {
            Some(last) if lo <= last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn sweep_units<T: ExactInt>(d: u64, e: u64, [n, s1, s2, t1, t2]: [T; 5]) -> T {
    let (dd, ee) = (T::from_i64(d as i64), T::from_i64(e as i64));
    let u = n.clone() * dd.clone() * ee.clone();
    // arc (s + a ± t)/d scaled by N·d·e is (S + aN ± T)·e
    let arcs = |k: u64, s: &T, t: &T, other: &T| -> Vec<(T, T)> {
        (0..k)
            .map(|a| {
                let c = s.clone() + T::from_i64(a as i64) * n.clone();
                ((c.clone() - t.clone()) * other.clone(), (c + t.clone()) * other.clone())
            })
            .collect()
    };
    let ua = arc_union(arcs(d, &s1, &t1, &ee), &u);
    let ub = arc_union(arcs(e, &s2, &t2, &dd), &u);
    let (mut i, mut j) = (0, 0);
    let mut total = T::zero();
    while i < ua.len() && j < ub.len() {
        let lo = ua[i].0.clone().max(ub[j].0.clone());
        let hi = ua[i].1.clone().min(ub[j].1.clone());
        if hi > lo {
            total = total + (hi - lo);
        }
        if ua[i].1 < ub[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// `λ₁(A ∩ B)` by materializing both arc families and sweeping their
/// intersection; independent of the weight function.
pub fn overlap_sweep_oracle(a: &TorusSet1D, b: &TorusSet1D) -> BigRational {
    let sc = Scaled::new(a, b);
    let num = sc.run(
        a.d,
        b.d,
        |v| sweep_units::<i128>(a.d, b.d, v).to_bigint(),
        |v| sweep_units::<BigInt>(a.d, b.d, v),
    );
    BigRational::new(num, &sc.n * BigInt::from(a.d) * BigInt::from(b.d))
}

/// `λ₂(A_q) = 2ψ(|q|)`.
pub fn measure_2d(q: &LatticeVector, psi: &ApproxFunction) -> Result<BigRational> {
    Ok(BigRational::from_integer(2.into()) * psi.eval(q.norm())?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapTag {
    Independent,
    ParallelReduced,
    Diagonal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Overlap2D {
    #[serde(serialize_with = "ser_ratio")]
    pub value: BigRational,
    pub tag: OverlapTag,
}

/// `λ₂(A_q ∩ A_r)` with `γ` taken as the given fixed-point value.
pub fn overlap_2d(
    q: &LatticeVector,
    r: &LatticeVector,
    psi: &ApproxFunction,
    gamma: &FixedPoint,
) -> Result<Overlap2D> {
    let pq = psi.eval(q.norm())?;
    let pr = psi.eval(r.norm())?;
    overlap_2d_values(q, r, &pq, &pr, &gamma.to_ratio())
}

/// As [`overlap_2d`] with `ψ(|q|)`, `ψ(|r|)` and the shift given directly.
pub fn overlap_2d_values(
    q: &LatticeVector,
    r: &LatticeVector,
    psi_q: &BigRational,
    psi_r: &BigRational,
    gamma: &BigRational,
) -> Result<Overlap2D> {
    let (p1, k1) = q.direction();
    let (p2, k2) = r.direction();
    if p1 != p2 {
        let two = BigRational::from_integer(2.into());
        return Ok(Overlap2D {
            value: &two * psi_q * &two * psi_r,
            tag: OverlapTag::Independent,
        });
    }
    let signed = |k: i64| if k < 0 { -gamma } else { gamma.clone() };
    let a = TorusSet1D::new(k1.unsigned_abs(), signed(k1), psi_q.clone())?;
    let b = TorusSet1D::new(k2.unsigned_abs(), signed(k2), psi_r.clone())?;
    let tag = if k1.unsigned_abs() == k2.unsigned_abs() {
        OverlapTag::Diagonal
    } else {
        OverlapTag::ParallelReduced
    };
    Ok(Overlap2D {
        value: overlap_exact_1d(&a, &b),
        tag,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridEstimate {
    #[serde(serialize_with = "ser_ratio")]
    pub estimate: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub error_bound: BigRational,
    pub resolution: u64,
    pub cells_hit: u64,
}

impl GridEstimate {
    pub fn contains(&self, value: &BigRational) -> bool {
        (&self.estimate - value).abs() <= self.error_bound
    }
}

/// Counts grid cells of side `1/resolution` whose centers lie in `A_q ∩ A_r`.
///
/// `γ` enters with 64 fractional bits. The error bound covers the cells
/// meeting a boundary line, `2(|v|₁ + gcd(v₁, v₂, R))/R` for each set that is
/// not the whole torus, plus `2^-62` per set for the truncation of `γ`.
pub fn overlap_2d_grid_oracle(
    q: &LatticeVector,
    r: &LatticeVector,
    psi: &ApproxFunction,
    gamma: &IrrationalShift,
    resolution: u64,
) -> Result<GridEstimate> {
    if resolution < 100 {
        return Err(Error::InvalidArgument("resolution must be ≥ 100".into()));
    }
    if resolution > 1 << 20 || q.l1_norm() > 1 << 20 || r.l1_norm() > 1 << 20 {
        return Err(Error::PrecisionRange("grid oracle supports resolution and |q|₁ up to 2^20".into()));
    }
    let res = resolution as i128;
    let period: i128 = 2 * res << 64;
    let g64: i128 = gamma
        .frac_floor(&BigInt::one(), 64)
        .floor
        .to_i128()
        .expect("64-bit fraction");
    let half = ratio(1, 2);
    struct Line {
        base: i128,
        di: i128,
        dj: i128,
        limit: i128,
        full: bool,
    }
    let mut bound = BigRational::zero();
    let mut setup = |v: &LatticeVector| -> Result<Line> {
        let p = psi.eval(v.norm())?;
        let full = p >= half;
        if !full {
            let g = v.q1.unsigned_abs().gcd(&v.q2.unsigned_abs()).gcd(&resolution);
            bound += BigRational::new(
                BigInt::from(2 * (v.l1_norm() + g)),
                BigInt::from(resolution),
            ) + BigRational::new(BigInt::one(), BigInt::one() << 62u32);
        }
        let limit = rational::floor(&(p * BigRational::from_integer(BigInt::from(period))))
            .to_i128()
            .expect("bounded by period");
        let one = 1i128 << 64;
        Ok(Line {
            // value at (0, 0): (v₁ + v₂)·2^64 − Γ·2R
            base: ((v.q1 as i128 + v.q2 as i128) * one - g64 * 2 * res).rem_euclid(period),
            di: (2 * v.q1 as i128 * one).rem_euclid(period),
            dj: (2 * v.q2 as i128 * one).rem_euclid(period),
            limit,
            full,
        })
    };
    let lq = setup(q)?;
    let lr = setup(r)?;
    let inside = |x: i128, l: &Line| l.full || x.min(period - x) <= l.limit;
    let mut hits = 0u64;
    let (mut row_q, mut row_r) = (lq.base, lr.base);
    for _ in 0..resolution {
        let (mut xq, mut xr) = (row_q, row_r);
        for _ in 0..resolution {
            if inside(xq, &lq) && inside(xr, &lr) {
                hits += 1;
            }
            xq = (xq + lq.dj) % period;
            xr = (xr + lr.dj) % period;
        }
        row_q = (row_q + lq.di) % period;
        row_r = (row_r + lr.di) % period;
    }
    Ok(GridEstimate {
        estimate: BigRational::new(BigInt::from(hits), BigInt::from(resolution) * BigInt::from(resolution)),
        error_bound: bound,
        resolution,
        cells_hit: hits,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Lemma3Outcome {
    ProvablyZero {
        #[serde(serialize_with = "ser_display")]
        threshold: BigInt,
    },
    BoundValue {
        #[serde(serialize_with = "ser_display")]
        threshold: BigInt,
        #[serde(serialize_with = "ser_ratio")]
        bound: BigRational,
    },
}

impl Lemma3Outcome {
    pub fn threshold(&self) -> &BigInt {
        match self {
            Lemma3Outcome::ProvablyZero { threshold } | Lemma3Outcome::BoundValue { threshold, .. } => {
                threshold
            }
        }
    }
}

/// Zero when `|r| > vanish_threshold(w, gcd(q))`, else
/// `4ψ(|q|)ψ(|r|) + 4(ψ(|q|)/d)·gcd(d, e)`.
pub fn lemma3_bound(
    q: &LatticeVector,
    r: &LatticeVector,
    psi: &ApproxFunction,
    w: &NonLiouvilleWitness,
) -> Result<Lemma3Outcome> {
    let pq = psi.eval(q.norm())?;
    let pr = psi.eval(r.norm())?;
    lemma3_bound_values(q, r, &pq, &pr, w)
}

pub fn lemma3_bound_values(
    q: &LatticeVector,
    r: &LatticeVector,
    psi_q: &BigRational,
    psi_r: &BigRational,
    w: &NonLiouvilleWitness,
) -> Result<Lemma3Outcome> {
    if !q.is_parallel(r) {
        return Err(Error::InvalidArgument(format!("{q} and {r} are not parallel")));
    }
    if r.norm() >= q.norm() {
        return Err(Error::InvalidArgument(format!("need |r| < |q|, got {r} and {q}")));
    }
    let d = q.gcd();
    let e = r.gcd();
    let threshold = vanish_threshold(w, d)?;
    if BigInt::from(r.norm()) > threshold {
        return Ok(Lemma3Outcome::ProvablyZero { threshold });
    }
    let four = BigRational::from_integer(4.into());
    let bound = &four * psi_q * psi_r
        + &four * psi_q / BigRational::from_integer(d.into())
            * BigRational::from_integer(d.gcd(&e).into());
    Ok(Lemma3Outcome::BoundValue { threshold, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::int;
    use crate::gamma::WitnessRange;
    use proptest::prelude::*;

    fn set(d: u64, s: BigRational, t: BigRational) -> TorusSet1D {
        TorusSet1D::new(d, s, t).unwrap()
    }

    fn v(a: i64, b: i64) -> LatticeVector {
        LatticeVector::new(a, b).unwrap()
    }

    /// Direct residue sum `g·∑_{c} w((c + σ)/L)` over a window of `c`.
    fn literal_residue_sum(a: &TorusSet1D, b: &TorusSet1D) -> BigRational {
        let geom = OverlapGeometry::new(a, b);
        let l = BigRational::from_integer(geom.l.clone());
        let span = rational::ceil(&((&geom.delta + &geom.big_delta) * &l)) + 2u32;
        let centre = rational::floor(&geom.shift_offset);
        let mut c = -&centre - &span;
        let end = -&centre + &span;
        let mut sum = BigRational::zero();
        while c <= end {
            let y = (BigRational::from_integer(c.clone()) + &geom.shift_offset) / &l;
            sum += weight_w(&y, &geom);
            c += 1;
        }
        sum * BigRational::from_integer(geom.g.into())
    }

    #[test]
    fn weight_function_shape() {
        let a = set(2, int(0), ratio(1, 10));
        let b = set(3, int(0), ratio(1, 5));
        let g = OverlapGeometry::new(&a, &b);
        assert_eq!(g.delta, ratio(1, 20));
        assert_eq!(g.big_delta, ratio(1, 15));
        assert_eq!(weight_w(&int(0), &g), ratio(1, 10));
        let edge = &g.delta + &g.big_delta;
        assert_eq!(weight_w(&edge, &g), int(0));
        assert_eq!(weight_w(&-edge, &g), int(0));
        assert_eq!(weight_w(&ratio(1, 30), &g), weight_w(&ratio(-1, 30), &g));
        assert_eq!(weight_integral(&g), int(4) * &g.delta * &g.big_delta);
        assert_eq!(BigInt::from(g.g) * &g.l, BigInt::from(6));
    }

    #[test]
    fn weight_integral_identity() {
        for (t1, t2) in [(ratio(1, 20), ratio(1, 5)), (ratio(1, 2), ratio(1, 2)), (int(0), ratio(1, 3))] {
            for d in 1..6 {
                for e in 1..6 {
                    let g = OverlapGeometry::new(&set(d, int(0), t1.clone()), &set(e, int(0), t2.clone()));
                    assert_eq!(weight_integral(&g), int(4) * &g.delta * &g.big_delta);
                }
            }
        }
    }

    #[test]
    fn documented_examples() {
        let o = overlap_exact_1d(&set(1, int(0), ratio(1, 10)), &set(1, int(0), ratio(1, 5)));
        assert_eq!(o, ratio(1, 5));
        let a = set(2, int(0), ratio(1, 10));
        let b = set(1, int(0), ratio(1, 10));
        assert_eq!(overlap_exact_1d(&a, &b), ratio(1, 10));
        assert_eq!(overlap_sweep_oracle(&a, &b), ratio(1, 10));
        let o = overlap_exact_1d(&set(3, ratio(1, 7), ratio(3, 50)), &set(3, ratio(1, 7), ratio(9, 100)));
        assert_eq!(o, ratio(3, 25));
        let a = set(1, int(0), ratio(1, 10));
        let b = set(1, ratio(1, 2), ratio(1, 10));
        assert_eq!(overlap_sweep_oracle(&a, &b), int(0));
        assert_eq!(overlap_exact_1d(&a, &b), int(0));
        let a = set(7, ratio(2, 3), ratio(1, 9));
        assert_eq!(overlap_sweep_oracle(&a, &a), a.measure());
        assert_eq!(overlap_exact_1d(&a, &a), a.measure());
    }

    #[test]
    fn full_circle() {
        let a = set(3, ratio(1, 3), ratio(1, 2));
        let b = set(5, ratio(1, 7), ratio(1, 2));
        assert_eq!(overlap_exact_1d(&a, &b), int(1));
        assert_eq!(overlap_sweep_oracle(&a, &b), int(1));
    }

    #[test]
    fn matches_literal_residue_sum() {
        for d in 1..9 {
            for e in 1..9 {
                let a = set(d, ratio(3, 11), ratio(1, 9));
                let b = set(e, ratio(-5, 13), ratio(1, 7));
                assert_eq!(overlap_exact_1d(&a, &b), literal_residue_sum(&a, &b), "d={d} e={e}");
            }
        }
    }

    #[test]
    fn big_backend_agrees() {
        // dyadic shifts with 200 bits force the BigInt path
        let s = BigRational::new(BigInt::from(12345678901234567u64) * BigInt::from(3u32).pow(60), BigInt::one() << 200u32);
        for (d, e) in [(1, 1), (2, 1), (6, 4), (13, 7)] {
            let a = set(d, s.clone(), ratio(1, 10));
            let b = set(e, -s.clone(), ratio(1, 7));
            assert!(!Scaled::new(&a, &b).fits_i128(d, e));
            assert_eq!(overlap_exact_1d(&a, &b), overlap_sweep_oracle(&a, &b));
        }
    }

    #[test]
    fn contains_agrees_with_arcs() {
        let a = set(5, ratio(1, 3), ratio(1, 8));
        for k in 0..200 {
            let x = ratio(k, 200);
            let in_arc = a.arcs().iter().any(|(lo, hi)| {
                (0..2).any(|s| {
                    let y = &x + int(s) - int(1);
                    *lo <= y && y <= *hi
                }) || (*lo <= x && x <= *hi)
            });
            assert_eq!(a.contains(&x), in_arc, "x={x}");
        }
    }

    proptest! {
        #[test]
        fn formula_equals_sweep(d in 1u64..60, e in 1u64..60, sn in -50i64..50, sd in 1i64..30,
                                 un in -50i64..50, ud in 1i64..30, t1 in 0i64..=10, t2 in 0i64..=10) {
            let a = set(d, ratio(sn, sd), ratio(t1, 20));
            let b = set(e, ratio(un, ud), ratio(t2, 20));
            let exact = overlap_exact_1d(&a, &b);
            prop_assert_eq!(&exact, &overlap_sweep_oracle(&a, &b));
            prop_assert_eq!(&exact, &overlap_exact_1d(&b, &a));
            prop_assert!(exact <= rational::min(&a.measure(), &b.measure()));
        }

        #[test]
        fn overlap_2d_symmetric(a in -20i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20, k in 0u32..4) {
            prop_assume!((a, b) != (0, 0) && (c, d) != (0, 0));
            let psi = ApproxFunction::parse("pow:1/4,1/2").unwrap();
            let g = IrrationalShift::sqrt(2 + k as u64 * 5).unwrap().frac(128).unwrap();
            let (q, r) = (v(a, b), v(c, d));
            let x = overlap_2d(&q, &r, &psi, &g).unwrap();
            let y = overlap_2d(&r, &q, &psi, &g).unwrap();
            prop_assert_eq!(&x, &y);
            let mq = measure_2d(&q, &psi).unwrap();
            let mr = measure_2d(&r, &psi).unwrap();
            prop_assert!(x.value <= rational::min(&mq, &mr));
        }
    }

    #[test]
    fn two_dimensional_examples() {
        let psi = ApproxFunction::parse("const:1/10").unwrap();
        let g = IrrationalShift::sqrt(2).unwrap().frac(128).unwrap();
        let o = overlap_2d(&v(1, 0), &v(0, 1), &psi, &g).unwrap();
        assert_eq!((o.value, o.tag), (ratio(1, 25), OverlapTag::Independent));
        let q = v(3, -5);
        let o = overlap_2d(&q, &q, &psi, &g).unwrap();
        assert_eq!((o.value, o.tag), (measure_2d(&q, &psi).unwrap(), OverlapTag::Diagonal));
        assert_eq!(overlap_2d(&q, &q.neg(), &psi, &g).unwrap().tag, OverlapTag::Diagonal);
        assert_eq!(measure_2d(&q, &psi).unwrap(), ratio(1, 5));
        let half = ApproxFunction::parse("const:1/2").unwrap();
        assert_eq!(measure_2d(&q, &half).unwrap(), int(1));
        let zero = ApproxFunction::parse("const:0").unwrap();
        assert_eq!(measure_2d(&q, &zero).unwrap(), int(0));
    }

    #[test]
    fn reduction_matches_pointwise_membership() {
        // spot check T_p^{-1}: α ∈ A_q ⇔ p·α ∈ A(d, s·γ)
        let gamma = ratio(7, 19);
        let set2 = TorusSet2D::new(v(-4, 6), gamma.clone(), ratio(1, 9)).unwrap();
        let (p, one_d) = set2.reduce();
        assert_eq!(p, v(2, -3));
        assert_eq!(one_d.d(), 2);
        for i in 0..40 {
            for j in 0..40 {
                let (a1, a2) = (ratio(i, 40), ratio(j, 40));
                let t = &a1 * int(p.q1) + &a2 * int(p.q2);
                assert_eq!(set2.contains(&a1, &a2), one_d.contains(&t));
            }
        }
    }

    #[test]
    fn parallel_pair_against_grid() {
        let psi = ApproxFunction::parse("pow:1/4,1/2").unwrap();
        let gamma = IrrationalShift::sqrt(2).unwrap();
        let (q, r) = (v(2, 4), v(1, 2));
        let exact = overlap_2d(&q, &r, &psi, &gamma.frac(192).unwrap()).unwrap();
        assert_eq!(exact.tag, OverlapTag::ParallelReduced);
        let grid = overlap_2d_grid_oracle(&q, &r, &psi, &gamma, 1000).unwrap();
        assert!(grid.contains(&exact.value), "{} vs {}", exact.value, grid.estimate);
    }

    #[test]
    fn grid_oracle_edge_cases() {
        let gamma = IrrationalShift::sqrt(2).unwrap();
        let half = ApproxFunction::parse("const:1/2").unwrap();
        let g = overlap_2d_grid_oracle(&v(3, 1), &v(-2, 5), &half, &gamma, 100).unwrap();
        assert_eq!((g.estimate, g.error_bound), (int(1), int(0)));
        let zero = ApproxFunction::parse("const:0").unwrap();
        let g = overlap_2d_grid_oracle(&v(1, 0), &v(0, 1), &zero, &gamma, 200).unwrap();
        assert_eq!(g.estimate, int(0));
        let tenth = ApproxFunction::parse("const:1/10").unwrap();
        let g = overlap_2d_grid_oracle(&v(1, 0), &v(0, 1), &tenth, &gamma, 2000).unwrap();
        assert!(g.contains(&ratio(1, 25)));
        assert!(g.error_bound <= ratio(1, 200));
        assert!(overlap_2d_grid_oracle(&v(1, 0), &v(0, 1), &tenth, &gamma, 99).is_err());
    }

    #[test]
    fn grid_converges_for_nonparallel() {
        let psi = ApproxFunction::parse("const:1/10").unwrap();
        let gamma = IrrationalShift::sqrt(3).unwrap();
        let (q, r) = (v(2, -1), v(1, 3));
        let truth = ratio(1, 25);
        for res in [500u64, 1000, 2000] {
            let g = overlap_2d_grid_oracle(&q, &r, &psi, &gamma, res).unwrap();
            assert!(g.contains(&truth), "res={res}");
        }
    }

    #[test]
    fn lemma3_examples() {
        let w = NonLiouvilleWitness::new(1, int(4), ratio(1, 4), ratio(1, 2), WitnessRange::UpTo(400)).unwrap();
        let psi = ApproxFunction::parse("pow:1/4,1/2").unwrap();
        // d = 2, |r| = 65 > 64
        let p = v(65, 3);
        match lemma3_bound(&p.scale(2), &p, &psi, &w).unwrap() {
            Lemma3Outcome::ProvablyZero { threshold } => assert_eq!(threshold, BigInt::from(64)),
            other => panic!("{other:?}"),
        }
        // d = 2, |r| = 10 ≤ 64: e = 1 so gcd(d, e) = 1
        let p = v(10, 7);
        let (q, r) = (p.scale(2), p);
        let pq = psi.eval(20).unwrap();
        let pr = psi.eval(10).unwrap();
        let expect = int(4) * &pq * &pr + int(2) * &pq;
        assert_eq!(
            lemma3_bound(&q, &r, &psi, &w).unwrap(),
            Lemma3Outcome::BoundValue { threshold: BigInt::from(64), bound: expect }
        );
        assert!(lemma3_bound(&v(1, 0), &v(0, 1), &psi, &w).is_err());
        assert!(lemma3_bound(&v(1, 2), &v(2, 4), &psi, &w).is_err());
    }
}
