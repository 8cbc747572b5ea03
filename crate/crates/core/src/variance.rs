//! Pairwise variance sums over the box and over order windows, the sweep of
//! the parallel overlap bound, and the higher-dimensional bound.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::fixed::ratio_to_f64;
use crate::counting::required_scale_bits;
use crate::error::{Error, Result};
use crate::gamma::{vanish_threshold, IrrationalShift, NonLiouvilleWitness};
use crate::lattice::{phi, LatticeVector, TotalOrder};
use crate::psi::{ApproxFunction, PsiTable};
use crate::report::{ser_decimal, ser_display, ser_opt_decimal};
use crate::torus::{lemma3_bound_values, overlap_exact_1d, Lemma3Outcome, TorusSet1D};

fn rat(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Number of canonical primitive directions `p` with `|p| = n`.
fn directions_with_norm(n: u64) -> u64 {
    if n == 1 {
        4
    } else {
        4 * phi(n)
    }
}

/// A canonical primitive vector of norm `n`.
fn representative(n: u64) -> LatticeVector {
    if n == 1 {
        LatticeVector { q1: 1, q2: 0 }
    } else {
        LatticeVector { q1: n as i64, q2: 1 }
    }
}

/// Overlaps `λ₁(A(|k₁|, ±γ, ψ(|k₁|n)) ∩ A(|k₂|, ±γ, ψ(|k₂|n)))` for the
/// multipliers of one primitive norm `n`.
struct PairEvaluator<'a> {
    psi: &'a PsiTable,
    gamma: BigRational,
    /// `‖mγ‖` for `0 ≤ m ≤ 2Q` as `f64`, used only to skip evaluations that are
    /// clearly zero.
    dist: &'a [f64],
    n: u64,
    memo: HashMap<(i64, i64), BigRational>,
    evaluated: u64,
}

impl<'a> PairEvaluator<'a> {
    fn new(psi: &'a PsiTable, gamma: &BigRational, dist: &'a [f64], n: u64) -> Self {
        PairEvaluator {
            psi,
            gamma: gamma.clone(),
            dist,
            n,
            memo: HashMap::new(),
            evaluated: 0,
        }
    }

    fn t(&self, k: i64) -> &BigRational {
        self.psi.get(k.unsigned_abs() * self.n)
    }

    fn overlap(&mut self, k1: i64, k2: i64) -> BigRational {
        if k1 == k2 {
            return rat(2) * self.t(k1);
        }
        // (k₁, k₂) ~ (k₂, k₁) ~ (−k₁, −k₂)
        let (mut a, mut b) = if k1.abs() <= k2.abs() { (k1, k2) } else { (k2, k1) };
        if a < 0 {
            (a, b) = (-a, -b);
        }
        if let Some(v) = self.memo.get(&(a, b)) {
            return v.clone();
        }
        let v = self.compute(a, b);
        self.memo.insert((a, b), v.clone());
        v
    }

    fn compute(&mut self, k1: i64, k2: i64) -> BigRational {
        let (t1, t2) = (self.t(k1).clone(), self.t(k2).clone());
        if t1.is_zero() || t2.is_zero() {
            return BigRational::zero();
        }
        let (d, e) = (k1.unsigned_abs(), k2.unsigned_abs());
        let g = d.gcd(&e);
        // arcs meet iff g·‖((±e ∓ d)/g)·γ‖ < e·t₁ + d·t₂
        let m = (k1.signum() * e as i64 - k2.signum() * d as i64).unsigned_abs() / g;
        let reach = e as f64 * ratio_to_f64(&t1) + d as f64 * ratio_to_f64(&t2);
        if g as f64 * self.dist[m as usize] > reach * (1.0 + 1e-9) + 1e-12 {
            return BigRational::zero();
        }
        self.evaluated += 1;
        let sign = |k: i64| if k < 0 { -&self.gamma } else { self.gamma.clone() };
        let a = TorusSet1D::new(d, sign(k1), t1).expect("valid radius");
        let b = TorusSet1D::new(e, sign(k2), t2).expect("valid radius");
        overlap_exact_1d(&a, &b)
    }
}

/// Sums over the multipliers of one direction class.
#[derive(Clone, Debug, Default)]
struct ClassSums {
    vectors: u64,
    measures: BigRational,
    overlaps: BigRational,
    products: BigRational,
    diag_overlap: BigRational,
    diag_products: BigRational,
    max_measure: BigRational,
}

impl ClassSums {
    fn scaled(&self, m: u64) -> ClassSums {
        let f = rat(m);
        ClassSums {
            vectors: self.vectors * m,
            measures: &self.measures * &f,
            overlaps: &self.overlaps * &f,
            products: &self.products * &f,
            diag_overlap: &self.diag_overlap * &f,
            diag_products: &self.diag_products * &f,
            max_measure: self.max_measure.clone(),
        }
    }

    fn add(&mut self, o: &ClassSums) {
        self.vectors += o.vectors;
        self.measures += &o.measures;
        self.overlaps += &o.overlaps;
        self.products += &o.products;
        self.diag_overlap += &o.diag_overlap;
        self.diag_products += &o.diag_products;
        if o.max_measure > self.max_measure {
            self.max_measure = o.max_measure.clone();
        }
    }

    fn finish_measures(&mut self, ev: &PairEvaluator<'_>, ks: &[i64]) {
        self.vectors = ks.len() as u64;
        for &k in ks {
            let m = rat(2) * ev.t(k);
            self.diag_products += &m * &m;
            if m > self.max_measure {
                self.max_measure = m.clone();
            }
            self.measures += m;
        }
        self.diag_overlap = self.measures.clone();
        self.products = &self.measures * &self.measures;
    }
}

/// Direction class `±1, …, ±K` using the symmetries of the pair table.
fn full_class(ev: &mut PairEvaluator<'_>, k_max: i64) -> ClassSums {
    let ks: Vec<i64> = (1..=k_max).flat_map(|k| [k, -k]).collect();
    let mut s = ClassSums::default();
    s.finish_measures(ev, &ks);
    let mut overlaps = BigRational::zero();
    for a in 1..=k_max {
        // orbits {(a,a), (−a,−a)} and {(a,−a), (−a,a)}
        overlaps += rat(2) * (ev.overlap(a, a) + ev.overlap(a, -a));
        for b in (a + 1)..=k_max {
            overlaps += rat(4) * (ev.overlap(a, b) + ev.overlap(a, -b));
        }
    }
    s.overlaps = overlaps;
    s
}

/// Direction class with an arbitrary multiplier set.
fn partial_class(ev: &mut PairEvaluator<'_>, ks: &[i64]) -> ClassSums {
    let mut s = ClassSums::default();
    s.finish_measures(ev, ks);
    let mut overlaps = BigRational::zero();
    for (i, &a) in ks.iter().enumerate() {
        overlaps += ev.overlap(a, a);
        for &b in &ks[i + 1..] {
            overlaps += rat(2) * ev.overlap(a, b);
        }
    }
    s.overlaps = overlaps;
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VarianceRange {
    Full {
        #[serde(rename = "Q")]
        q_max: u64,
    },
    /// Inclusive positions in [`TotalOrder`].
    Window { u: u64, v: u64 },
}

/// Contributions to the variance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    /// `∑_q (λ(A_q) − λ(A_q)²)`.
    #[serde(serialize_with = "ser_decimal")]
    pub diagonal: BigRational,
    /// `∑_{q ≠ r parallel} (λ(A_q ∩ A_r) − λ(A_q)λ(A_r))`.
    #[serde(serialize_with = "ser_decimal")]
    pub parallel_offdiag: BigRational,
    /// Same sum over non-parallel pairs; zero by the product rule.
    #[serde(serialize_with = "ser_decimal")]
    pub nonparallel: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub range: VarianceRange,
    pub gamma_id: String,
    pub psi_id: String,
    pub scale_bits: u32,
    pub vectors: u64,
    #[serde(serialize_with = "ser_decimal")]
    pub sum_pair_overlaps: BigRational,
    #[serde(serialize_with = "ser_decimal")]
    pub sum_measures: BigRational,
    #[serde(serialize_with = "ser_decimal")]
    pub variance: BigRational,
    /// `variance / sum_measures`; absent when every set is empty.
    #[serde(serialize_with = "ser_opt_decimal")]
    pub ratio: Option<BigRational>,
    pub decomposition: Decomposition,
    /// `∑_q λ(A_q ∩ A_q) = ∑_q λ(A_q)`.
    #[serde(serialize_with = "ser_decimal")]
    pub diagonal_overlap_sum: BigRational,
    #[serde(serialize_with = "ser_decimal")]
    pub max_measure: BigRational,
    /// Ordered off-diagonal parallel pairs.
    pub parallel_pairs: u64,
    /// Distinct pair overlaps that went through the exact formula.
    pub exact_evaluations: u64,
    /// Bound on the effect of truncating `γ` to `scale_bits`.
    #[serde(serialize_with = "ser_decimal")]
    pub error_bound: BigRational,
}

impl VarianceReport {
    pub fn ratio_f64(&self) -> Option<f64> {
        self.ratio.as_ref().map(ratio_to_f64)
    }
}

struct Setup {
    psi: PsiTable,
    gamma: BigRational,
    dist: Vec<f64>,
}

fn setup(q_max: u64, psi: &ApproxFunction, gamma: &IrrationalShift, scale_bits: u32) -> Result<Setup> {
    let need = required_scale_bits(q_max);
    if scale_bits < need {
        return Err(Error::PrecisionRange(format!(
            "Q = {q_max} needs scale_bits ≥ {need}, got {scale_bits}"
        )));
    }
    let g = gamma.frac(scale_bits)?;
    let dist = (0..=2 * q_max)
        .map(|m| g.mul_int(&BigInt::from(m)).dist_nearest_int().to_f64())
        .collect();
    Ok(Setup {
        psi: psi.table_upto(q_max),
        gamma: g.to_ratio(),
        dist,
    })
}

fn assemble(
    range: VarianceRange,
    total: ClassSums,
    parallel_pairs: u64,
    exact_evaluations: u64,
    psi: &ApproxFunction,
    gamma: &IrrationalShift,
    scale_bits: u32,
) -> VarianceReport {
    let s2 = &total.measures * &total.measures;
    // non-parallel pairs contribute their products exactly
    let sum_pair_overlaps = &total.overlaps + &s2 - &total.products;
    let variance = &total.overlaps - &total.products;
    let diagonal = &total.diag_overlap - &total.diag_products;
    let parallel_offdiag = &variance - &diagonal;
    let nonparallel = (&sum_pair_overlaps - &total.overlaps) - (&s2 - &total.products);
    let ratio = (!total.measures.is_zero()).then(|| &variance / &total.measures);
    let error_bound = BigRational::new(
        BigInt::from(parallel_pairs),
        BigInt::one() << scale_bits.saturating_sub(8),
    );
    VarianceReport {
        range,
        gamma_id: gamma.id().to_string(),
        psi_id: psi.to_string(),
        scale_bits,
        vectors: total.vectors,
        sum_pair_overlaps,
        sum_measures: total.measures,
        variance,
        ratio,
        decomposition: Decomposition {
            diagonal,
            parallel_offdiag,
            nonparallel,
        },
        diagonal_overlap_sum: total.diag_overlap,
        max_measure: total.max_measure,
        parallel_pairs,
        exact_evaluations,
        error_bound,
    }
}

/// `∑_{|q|,|r| ≤ Q} λ(A_q ∩ A_r) − (∑ λ(A_q))²` over the whole box.
///
/// Only parallel pairs are enumerated. Directions of equal norm share their
/// pair table, so each norm is evaluated once and weighted.
pub fn variance_full(
    q_max: u64,
    psi: &ApproxFunction,
    gamma: &IrrationalShift,
    scale_bits: u32,
) -> Result<VarianceReport> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("Q must be ≥ 1".into()));
    }
    let st = setup(q_max, psi, gamma, scale_bits)?;
    let per_norm: Vec<(ClassSums, u64, u64)> = (1..=q_max)
        .into_par_iter()
        .map(|n| {
            let k = q_max / n;
            let mult = directions_with_norm(n);
            let mut ev = PairEvaluator::new(&st.psi, &st.gamma, &st.dist, n);
            let sums = full_class(&mut ev, k as i64);
            let size = 2 * k;
            (sums.scaled(mult), mult * size * (size - 1), ev.evaluated)
        })
        .collect();
    let mut total = ClassSums::default();
    let (mut pairs, mut evals) = (0, 0);
    for (s, p, e) in &per_norm {
        total.add(s);
        pairs += p;
        evals += e;
    }
    Ok(assemble(VarianceRange::Full { q_max }, total, pairs, evals, psi, gamma, scale_bits))
}

/// The same sum restricted to positions `u ..= v` of the total order.
///
/// Vectors are grouped by direction; directions of one norm whose multiplier
/// sets coincide are evaluated once.
pub fn variance_window(
    u: u64,
    v: u64,
    psi: &ApproxFunction,
    gamma: &IrrationalShift,
    scale_bits: u32,
) -> Result<VarianceReport> {
    if v < u {
        return Err(Error::InvalidArgument(format!("empty window {u}..={v}")));
    }
    let last = TotalOrder::nth(v).norm();
    let first = TotalOrder::nth(u).norm();
    let st = setup(last, psi, gamma, scale_bits)?;
    let mut classes: BTreeMap<LatticeVector, Vec<i64>> = BTreeMap::new();
    for n in first..=last {
        let lo = TotalOrder::shell_start(n).max(u);
        let hi = TotalOrder::shell_start(n + 1).min(v + 1);
        for i in lo..hi {
            let (p, k) = TotalOrder::nth(i).direction();
            classes.entry(p).or_default().push(k);
        }
    }
    let mut by_norm: BTreeMap<u64, BTreeMap<Vec<i64>, u64>> = BTreeMap::new();
    for (p, mut ks) in classes {
        ks.sort_unstable();
        *by_norm.entry(p.norm()).or_default().entry(ks).or_insert(0) += 1;
    }
    let per_norm: Vec<(ClassSums, u64, u64)> = by_norm
        .into_par_iter()
        .map(|(n, sigs)| {
            let mut ev = PairEvaluator::new(&st.psi, &st.gamma, &st.dist, n);
            let mut acc = ClassSums::default();
            let mut pairs = 0;
            for (ks, mult) in &sigs {
                acc.add(&partial_class(&mut ev, ks).scaled(*mult));
                let size = ks.len() as u64;
                pairs += mult * size * (size - 1);
            }
            (acc, pairs, ev.evaluated)
        })
        .collect();
    let mut total = ClassSums::default();
    let (mut pairs, mut evals) = (0, 0);
    for (s, p, e) in &per_norm {
        total.add(s);
        pairs += p;
        evals += e;
    }
    Ok(assemble(VarianceRange::Window { u, v }, total, pairs, evals, psi, gamma, scale_bits))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma3Status {
    ZeroConfirmed,
    BoundSatisfied,
    #[serde(rename = "VIOLATION")]
    Violation,
}

impl std::fmt::Display for Lemma3Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Lemma3Status::ZeroConfirmed => "zero-confirmed",
            Lemma3Status::BoundSatisfied => "bound-satisfied",
            Lemma3Status::Violation => "VIOLATION",
        })
    }
}

/// One parallel pair class `q = k₁p`, `r = k₂p` with `|r| < |q|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma3Row {
    pub d: u64,
    pub e: u64,
    #[serde(serialize_with = "ser_display")]
    pub r: LatticeVector,
    #[serde(serialize_with = "ser_display")]
    pub q: LatticeVector,
    #[serde(serialize_with = "ser_display")]
    pub threshold: BigInt,
    #[serde(serialize_with = "ser_decimal")]
    pub overlap: BigRational,
    /// Absent when the class is provably empty.
    #[serde(serialize_with = "ser_opt_decimal")]
    pub bound: Option<BigRational>,
    pub status: Lemma3Status,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma3Summary {
    #[serde(rename = "Q")]
    pub q_max: u64,
    pub rows: usize,
    pub zero_confirmed: usize,
    pub bound_satisfied: usize,
    pub violations: usize,
    /// Largest `overlap / bound` among bounded rows.
    pub max_bound_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Lemma3Sweep {
    pub rows: Vec<Lemma3Row>,
    pub summary: Lemma3Summary,
}

/// Checks every parallel pair class with `|r| < |q| ≤ Q` against the
/// vanishing threshold and the bound.
///
/// Overlaps depend on `q`, `r` only through `|p|`, `k₁`, `k₂` and are symmetric
/// under `(q, r) ↦ (−q, −r)`, so one row is emitted per `(|p|, k₁ > 0, k₂)`
/// with `p` a fixed representative of its norm.
pub fn lemma3_sweep(
    q_max: u64,
    psi: &ApproxFunction,
    w: &NonLiouvilleWitness,
    gamma: &IrrationalShift,
    scale_bits: u32,
) -> Result<Lemma3Sweep> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("Q must be ≥ 1".into()));
    }
    if !w.is_valid(gamma, psi, q_max) {
        return Err(Error::InvalidArgument(format!(
            "witness (η={}, c={}) does not hold up to Q={q_max}",
            w.eta, w.c
        )));
    }
    let st = setup(q_max, psi, gamma, scale_bits)?;
    let thresholds: Vec<BigInt> = (0..=q_max)
        .map(|d| if d == 0 { Ok(BigInt::zero()) } else { vanish_threshold(w, d) })
        .collect::<Result<_>>()?;
    let per_norm: Vec<Vec<Lemma3Row>> = (1..=q_max)
        .into_par_iter()
        .map(|n| -> Result<Vec<Lemma3Row>> {
            let p = representative(n);
            let mut ev = PairEvaluator::new(&st.psi, &st.gamma, &st.dist, n);
            let mut rows = Vec::new();
            for k1 in 2..=(q_max / n) as i64 {
                for e in 1..k1 {
                    for k2 in [e, -e] {
                        let overlap = ev.overlap(k1, k2);
                        let (q, r) = (p.scale(k1), p.scale(k2));
                        let pq = ev.t(k1).clone();
                        let pr = ev.t(k2).clone();
                        let outcome = lemma3_bound_values(&q, &r, &pq, &pr, w)?;
                        debug_assert_eq!(outcome.threshold(), &thresholds[k1 as usize]);
                        let (bound, status) = match outcome {
                            Lemma3Outcome::ProvablyZero { .. } => (
                                None,
                                if overlap.is_zero() {
                                    Lemma3Status::ZeroConfirmed
                                } else {
                                    Lemma3Status::Violation
                                },
                            ),
                            Lemma3Outcome::BoundValue { bound, .. } => {
                                let ok = overlap <= bound;
                                (
                                    Some(bound),
                                    if ok {
                                        Lemma3Status::BoundSatisfied
                                    } else {
                                        Lemma3Status::Violation
                                    },
                                )
                            }
                        };
                        rows.push(Lemma3Row {
                            d: k1 as u64,
                            e: e as u64,
                            r,
                            q,
                            threshold: thresholds[k1 as usize].clone(),
                            overlap,
                            bound,
                            status,
                        });
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Lemma3Row> = per_norm.into_iter().flatten().collect();
    let count = |s: Lemma3Status| rows.iter().filter(|r| r.status == s).count();
    let max_bound_ratio = rows
        .iter()
        .filter_map(|r| r.bound.as_ref().map(|b| ratio_to_f64(&(&r.overlap / b))))
        .fold(0.0, f64::max);
    let summary = Lemma3Summary {
        q_max,
        rows: rows.len(),
        zero_confirmed: count(Lemma3Status::ZeroConfirmed),
        bound_satisfied: count(Lemma3Status::BoundSatisfied),
        violations: count(Lemma3Status::Violation),
        max_bound_ratio,
    };
    Ok(Lemma3Sweep { rows, summary })
}

/// `(4ψ(q)ψ(r) + 4(ψ(q)/q)·(q,r))^m` and its one-dimensional comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HighDimCheck {
    pub q: u64,
    pub r: u64,
    pub m: u32,
    #[serde(serialize_with = "ser_decimal")]
    pub product_term: BigRational,
    #[serde(serialize_with = "ser_decimal")]
    pub gcd_term: BigRational,
    #[serde(serialize_with = "ser_decimal")]
    pub bound: BigRational,
    /// For every `n | (q,r)`, writing `q = dn`, `r = en`, the one-dimensional
    /// bound `4ψ(q)ψ(r) + 4(ψ(q)/d)(d,e)` equals the `m = 1` value.
    pub one_dim_consistent: bool,
}

pub fn highdim_bound_check(q: u64, r: u64, psi: &ApproxFunction, m: u32) -> Result<HighDimCheck> {
    if r == 0 || r >= q {
        return Err(Error::InvalidArgument(format!("need 0 < r < q, got q={q}, r={r}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be ≥ 1".into()));
    }
    let pq = psi.eval(q)?;
    let pr = psi.eval(r)?;
    let g = q.gcd(&r);
    let product_term = rat(4) * &pq * &pr;
    let gcd_term = rat(4) * &pq / rat(q) * rat(g);
    let one = &product_term + &gcd_term;
    let one_dim_consistent = crate::lattice::divisors(g).into_iter().all(|n| {
        let (d, e) = (q / n, r / n);
        &product_term + rat(4) * &pq / rat(d) * rat(d.gcd(&e)) == one
    });
    let bound = num_traits::pow(one, m as usize);
    Ok(HighDimCheck {
        q,
        r,
        m,
        product_term,
        gcd_term,
        bound,
        one_dim_consistent,
    })
}

/// `gcd(d, e)/d = gcd(|q|, |r|)/|q|` for parallel `q = d·p`, `r = e·p`.
pub fn gcd_identity_holds(q: &LatticeVector, r: &LatticeVector) -> bool {
    if !q.is_parallel(r) {
        return false;
    }
    let (d, e) = (q.gcd(), r.gcd());
    let (a, b) = (q.norm(), r.norm());
    BigRational::new(d.gcd(&e).into(), d.into()) == BigRational::new(a.gcd(&b).into(), a.into())
}

/// Scale for which the `f64` zero prefilter and the truncation bound are
/// meaningful at this `Q`.
pub fn default_scale_bits(q_max: u64) -> u32 {
    required_scale_bits(q_max).max(crate::arith::DEFAULT_SCALE_BITS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{int, ratio};
    use crate::gamma::WitnessRange;
    use crate::torus::overlap_sweep_oracle;
    use num_traits::Signed;
    use proptest::prelude::*;

    const S: u32 = 192;

    fn box_vectors(q_max: u64) -> Vec<LatticeVector> {
        let m = q_max as i64;
        let mut out = Vec::new();
        for a in -m..=m {
            for b in -m..=m {
                if (a, b) != (0, 0) {
                    out.push(LatticeVector { q1: a, q2: b });
                }
            }
        }
        out
    }

    /// Every ordered pair, parallel ones through the sweep oracle.
    fn brute_pairs(vs: &[LatticeVector], psi: &ApproxFunction, gamma: &IrrationalShift) -> (BigRational, BigRational) {
        let g = gamma.frac(S).unwrap().to_ratio();
        let reduce = |q: &LatticeVector| {
            let (_, k) = q.direction();
            let s = if k < 0 { -&g } else { g.clone() };
            TorusSet1D::new(k.unsigned_abs(), s, psi.eval(q.norm()).unwrap()).unwrap()
        };
        let mut pairs = BigRational::zero();
        let mut measures = BigRational::zero();
        for q in vs {
            measures += int(2) * psi.eval(q.norm()).unwrap();
            for r in vs {
                pairs += if q.is_parallel(r) {
                    overlap_sweep_oracle(&reduce(q), &reduce(r))
                } else {
                    int(4) * psi.eval(q.norm()).unwrap() * psi.eval(r.norm()).unwrap()
                };
            }
        }
        (pairs, measures)
    }

    #[test]
    fn matches_all_pairs_brute_force() {
        let gamma = IrrationalShift::sqrt(2).unwrap();
        for spec in ["const:1/10", "pow:1/4,1/2", "const:2/5"] {
            let psi = ApproxFunction::parse(spec).unwrap();
            for q in [1, 2, 3] {
                let rep = variance_full(q, &psi, &gamma, S).unwrap();
                let (pairs, measures) = brute_pairs(&box_vectors(q), &psi, &gamma);
                assert_eq!(rep.sum_pair_overlaps, pairs, "{spec} Q={q}");
                assert_eq!(rep.sum_measures, measures);
                assert_eq!(rep.variance, &pairs - &measures * &measures);
                assert!(rep.decomposition.nonparallel.is_zero());
            }
        }
    }

    #[test]
    fn q1_decomposition() {
        let gamma = IrrationalShift::sqrt(2).unwrap();
        let psi = ApproxFunction::parse("const:1/10").unwrap();
        let rep = variance_full(1, &psi, &gamma, S).unwrap();
        assert_eq!(rep.vectors, 8);
        assert_eq!(rep.parallel_pairs, 8);
        // A_q ∩ A_{−q} needs ‖2γ‖ ≤ 2ψ, and ‖2√2‖ ≈ 0.17 < 0.2
        let pair = {
            let g = gamma.frac(S).unwrap().to_ratio();
            let a = TorusSet1D::new(1, g.clone(), ratio(1, 10)).unwrap();
            let b = TorusSet1D::new(1, -g, ratio(1, 10)).unwrap();
            overlap_sweep_oracle(&a, &b)
        };
        assert!(pair.is_positive());
        assert_eq!(rep.diagonal_overlap_sum, ratio(8, 5));
        assert_eq!(rep.decomposition.diagonal, int(8) * (ratio(1, 5) - ratio(1, 25)));
        assert_eq!(rep.decomposition.parallel_offdiag, int(8) * (&pair - ratio(1, 25)));
        assert!(rep.diagonal_overlap_sum <= int(2) * &rep.sum_measures);
    }

    #[test]
    fn trivial_psi() {
        let gamma = IrrationalShift::golden_ratio();
        let zero = ApproxFunction::parse("const:0").unwrap();
        let rep = variance_full(20, &zero, &gamma, S).unwrap();
        assert!(rep.variance.is_zero());
        assert!(rep.ratio.is_none());
        let rep = variance_window(5, 100, &zero, &gamma, S).unwrap();
        assert!(rep.variance.is_zero());
    }

    #[test]
    fn window_single_vector() {
        let gamma = IrrationalShift::sqrt(3).unwrap();
        let psi = ApproxFunction::parse("pow:1/4,1/2").unwrap();
        for i in [0u64, 7, 30, 123] {
            let rep = variance_window(i, i, &psi, &gamma, S).unwrap();
            let m = int(2) * psi.eval(TotalOrder::nth(i).norm()).unwrap();
            assert_eq!(rep.variance, &m * (int(1) - &m));
        }
    }

    #[test]
    fn window_matches_brute_force() {
        let gamma = IrrationalShift::sqrt(2).unwrap();
        let psi = ApproxFunction::parse("const:1/10").unwrap();
        for (u, v) in [(0, 7), (8, 23), (3, 40), (10, 11), (0, 80)] {
            let vs: Vec<_> = (u..=v).map(TotalOrder::nth).collect();
            let (pairs, measures) = brute_pairs(&vs, &psi, &gamma);
            let rep = variance_window(u, v, &psi, &gamma, S).unwrap();
            assert_eq!(rep.sum_pair_overlaps, pairs, "{u}..={v}");
            assert_eq!(rep.sum_measures, measures);
        }
    }

    #[test]
    fn full_window_equals_full_box() {
        let gamma = IrrationalShift::sqrt(5).unwrap();
        let psi = ApproxFunction::parse("pow:1/4,1/2").unwrap();
        let q = 12;
        let full = variance_full(q, &psi, &gamma, S).unwrap();
        let win = variance_window(0, TotalOrder::shell_start(q + 1) - 1, &psi, &gamma, S).unwrap();
        assert_eq!(full.variance, win.variance);
        assert_eq!(full.sum_pair_overlaps, win.sum_pair_overlaps);
    }

    #[test]
    fn one_shell_window_only_opposite_pairs() {
        let gamma = IrrationalShift::sqrt(2).unwrap();
        let psi = ApproxFunction::parse("const:1/10").unwrap();
        let n = 3;
        let (u, v) = (TotalOrder::shell_start(n), TotalOrder::shell_start(n + 1) - 1);
        let rep = variance_window(u, v, &psi, &gamma, S).unwrap();
        // within one shell parallel vectors are exactly ±q
        assert_eq!(rep.parallel_pairs, 8 * n);
        let g = gamma.frac(S).unwrap().to_ratio();
        let mut expect = int(8 * n as i64) * (ratio(1, 5) - ratio(1, 25));
        for q in crate::lattice::shell(n) {
            let (_, k) = q.direction();
            let s = if k < 0 { -&g } else { g.clone() };
            let a = TorusSet1D::new(k.unsigned_abs(), s.clone(), ratio(1, 10)).unwrap();
            let b = TorusSet1D::new(k.unsigned_abs(), -s, ratio(1, 10)).unwrap();
            expect += overlap_sweep_oracle(&a, &b) - ratio(1, 25);
        }
        assert_eq!(rep.variance, expect);
    }

    #[test]
    fn rejects_low_precision() {
        let gamma = IrrationalShift::sqrt(2).unwrap();
        let psi = ApproxFunction::parse("const:1/10").unwrap();
        assert!(matches!(variance_full(100, &psi, &gamma, 64), Err(Error::PrecisionRange(_))));
    }

    fn sqrt2_witness() -> NonLiouvilleWitness {
        NonLiouvilleWitness::new(1, int(4), ratio(1, 4), ratio(1, 2), WitnessRange::UpTo(1000)).unwrap()
    }

    #[test]
    fn lemma3_small_sweep() {
        let gamma = IrrationalShift::sqrt(2).unwrap();
        let psi = ApproxFunction::parse("pow:1/4,1/2").unwrap();
        let sweep = lemma3_sweep(160, &psi, &sqrt2_witness(), &gamma, S).unwrap();
        assert_eq!(sweep.summary.violations, 0);
        assert!(sweep.summary.zero_confirmed > 0);
        assert!(sweep.summary.max_bound_ratio < 1.0);
        let first_zero = sweep
            .rows
            .iter()
            .find(|r| r.status == Lemma3Status::ZeroConfirmed)
            .unwrap();
        assert_eq!(first_zero.d, 2);
        assert_eq!(first_zero.threshold, BigInt::from(64));
        assert!(first_zero.r.norm() > 64);
        for row in &sweep.rows {
            assert!(row.r.norm() < row.q.norm());
            assert_eq!(row.q.gcd(), row.d);
        }
    }

    #[test]
    fn highdim_examples() {
        let zero = ApproxFunction::parse("const:0").unwrap();
        assert!(highdim_bound_check(5, 3, &zero, 2).unwrap().bound.is_zero());
        let psi = ApproxFunction::parse("const:1/10").unwrap();
        let c = highdim_bound_check(6, 4, &psi, 2).unwrap();
        let inner = ratio(4, 100) + int(4) * ratio(1, 60) * int(2);
        assert_eq!(c.bound, &inner * &inner);
        assert!(c.one_dim_consistent);
        assert!(highdim_bound_check(4, 4, &psi, 2).is_err());
    }

    proptest! {
        #[test]
        fn gcd_identity_on_parallel_pairs(
            a in -30i64..30, b in -30i64..30, k1 in 1i64..40, k2 in -40i64..40
        ) {
            prop_assume!((a, b) != (0, 0) && k2 != 0);
            let p = LatticeVector { q1: a, q2: b }.primitive();
            let (q, r) = (p.scale(k1), p.scale(k2));
            prop_assert!(gcd_identity_holds(&q, &r));
            // the reversed form only holds when the multipliers agree in size
            let (d, e) = (q.gcd(), r.gcd());
            let reversed = BigRational::new(d.gcd(&e).into(), e.into())
                == BigRational::new(q.norm().gcd(&r.norm()).into(), q.norm().into());
            prop_assert_eq!(reversed, d == e);
        }

        #[test]
        fn variance_nonnegative(q in 1u64..14, c in 1i64..10, seed in 0u64..4) {
            let gamma = [IrrationalShift::sqrt(2), IrrationalShift::sqrt(3), IrrationalShift::sqrt(7), IrrationalShift::sqrt(11)]
                [seed as usize].clone().unwrap();
            let psi = ApproxFunction::power_law(ratio(c, 20), ratio(1, 2)).unwrap();
            let rep = variance_full(q, &psi, &gamma, S).unwrap();
            prop_assert!(!rep.variance.is_negative());
            prop_assert!(rep.decomposition.nonparallel.is_zero());
            prop_assert!(rep.diagonal_overlap_sum <= int(2) * &rep.sum_measures);
        }
    }
}
