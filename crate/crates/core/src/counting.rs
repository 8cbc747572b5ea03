//! The counting function `N(α, Q, γ)`, its main terms, and `χ(Q)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::fixed::ratio_to_f64;
use crate::arith::surd::ceil_log2_one_plus;
use crate::arith::{rational, FixedPoint, TorusWord, MIN_SCALE_BITS};
use crate::error::{Error, Result};
use crate::gamma::IrrationalShift;
use crate::lattice::{gcd_histogram, shell, shell_size, tau, LatticeVector};
use crate::psi::ApproxFunction;
use crate::report::ser_decimal;

/// Smallest scale at which `count_solutions` accepts `Q`: `64 + ⌈log₂(1 + 2Q)⌉`.
pub fn required_scale_bits(q_max: u64) -> u32 {
    MIN_SCALE_BITS + ceil_log2_one_plus(&BigInt::from(2 * q_max)) as u32
}

/// A sampled point `α ∈ T²` together with the data needed to count at it.
struct Point<'a> {
    a1: BigInt,
    a2: BigInt,
    scale: u32,
    gamma: &'a IrrationalShift,
}

impl<'a> Point<'a> {
    fn new(alpha: &(FixedPoint, FixedPoint), gamma: &'a IrrationalShift) -> Result<Self> {
        let scale = alpha.0.scale_bits().max(alpha.1.scale_bits());
        let one = BigInt::one() << scale;
        let a1 = alpha.0.upscale(scale).mantissa().mod_floor(&one);
        let a2 = alpha.1.upscale(scale).mantissa().mod_floor(&one);
        Ok(Point { a1, a2, scale, gamma })
    }

    /// Exact number of `p` with `|q·α − p − γ| ≤ ψ`, refining the precision of
    /// `γ` until every comparison is decided.
    fn count_vector(&self, q: &LatticeVector, psi: &BigRational) -> u64 {
        let mut s = self.scale;
        loop {
            let one = BigInt::one() << s;
            let lift = s - self.scale;
            let i = ((&self.a1 * q.q1 + &self.a2 * q.q2) << lift).mod_floor(&one);
            let g = self.gamma.frac_floor(&BigInt::one(), s).floor;
            // frac(q·α − γ)·2^s ∈ (y, y + 1)
            let y = (i - g - 1u32).mod_floor(&one);
            let scaled = psi * BigRational::from_integer(one.clone());
            let p = rational::floor(&scaled);
            let pc = rational::ceil(&scaled);
            let c0 = decide(&y + 1u32 <= p, y >= pc);
            let c1 = decide(y >= &one - &p, &y + 1u32 <= &one - &pc);
            if let (Some(c0), Some(c1)) = (c0, c1) {
                return c0 as u64 + c1 as u64;
            }
            s *= 2;
        }
    }
}

fn decide(certainly_true: bool, certainly_false: bool) -> Option<bool> {
    match (certainly_true, certainly_false) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    }
}

/// Per-shell comparison thresholds as torus words.
struct Thresholds<const N: usize> {
    p: TorusWord<N>,
    pc: TorusWord<N>,
    /// `2^S − P`, absent when `P = 0`.
    one_minus_p: Option<TorusWord<N>>,
    /// `2^S − Pc`, absent when `Pc = 0`.
    one_minus_pc: Option<TorusWord<N>>,
}

impl<const N: usize> Thresholds<N> {
    fn new(psi: &BigRational) -> Self {
        let scaled = psi * BigRational::from_integer(BigInt::one() << TorusWord::<N>::BITS);
        let p = rational::floor(&scaled);
        let pc = rational::ceil(&scaled);
        let word = |x: &BigInt| TorusWord::<N>::from_bigint(x);
        let neg = |x: &BigInt| (!x.is_zero()).then(|| word(x).wrapping_neg());
        Thresholds {
            p: word(&p),
            pc: word(&pc),
            one_minus_p: neg(&p),
            one_minus_pc: neg(&pc),
        }
    }

    /// `Some(count)` when decided at this precision.
    #[inline]
    fn classify(&self, y: &TorusWord<N>) -> Option<u64> {
        let c0 = if *y < self.p {
            true
        } else if *y >= self.pc {
            false
        } else {
            return None;
        };
        let c1 = if self.one_minus_p.is_some_and(|t| *y >= t) {
            true
        } else if self.one_minus_pc.map_or(true, |t| *y < t) {
            false
        } else {
            return None;
        };
        Some(c0 as u64 + c1 as u64)
    }
}

fn count_shell_words<const N: usize>(point: &Point<'_>, n: u64, psi: &BigRational) -> u64 {
    if psi.is_zero() {
        // ‖q·α − γ‖ = 0 is impossible for irrational γ
        return 0;
    }
    let a1 = TorusWord::<N>::from_bigint(&point.a1);
    let a2 = TorusWord::<N>::from_bigint(&point.a2);
    let g = TorusWord::<N>::from_bigint(&point.gamma.frac_floor(&BigInt::one(), point.scale).floor);
    let g1 = g.wrapping_add(&TorusWord::<N>::from_bigint(&BigInt::one()));
    let th = Thresholds::<N>::new(psi);
    let m = n as i64;
    let mut total = 0u64;
    let mut visit = |q1: i64, q2: i64, y: TorusWord<N>| match th.classify(&y) {
        Some(c) => total += c,
        None => total += point.count_vector(&LatticeVector { q1, q2 }, psi),
    };
    // rows q₁ = ±n: step q₂ by one, adding α₂ each time
    for q1 in [-m, m] {
        let mut y = a1
            .wrapping_mul_i64(q1)
            .wrapping_add(&a2.wrapping_mul_i64(-m))
            .wrapping_sub(&g1);
        for q2 in -m..=m {
            visit(q1, q2, y);
            y = y.wrapping_add(&a2);
        }
    }
    // columns q₂ = ±n with |q₁| < n
    for q2 in [-m, m] {
        let mut y = a1
            .wrapping_mul_i64(-m + 1)
            .wrapping_add(&a2.wrapping_mul_i64(q2))
            .wrapping_sub(&g1);
        for q1 in (-m + 1)..m {
            visit(q1, q2, y);
            y = y.wrapping_add(&a1);
        }
    }
    total
}

fn count_shell_big(point: &Point<'_>, n: u64, psi: &BigRational) -> u64 {
    if psi.is_zero() {
        return 0;
    }
    shell(n).iter().map(|q| point.count_vector(q, psi)).sum()
}

fn count_shell_at(point: &Point<'_>, n: u64, psi: &BigRational) -> u64 {
    match point.scale {
        64 => count_shell_words::<1>(point, n, psi),
        128 => count_shell_words::<2>(point, n, psi),
        192 => count_shell_words::<3>(point, n, psi),
        256 => count_shell_words::<4>(point, n, psi),
        _ => count_shell_big(point, n, psi),
    }
}

fn check_range(alpha: &(FixedPoint, FixedPoint), q_max: u64) -> Result<()> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("Q must be ≥ 1".into()));
    }
    let scale = alpha.0.scale_bits().max(alpha.1.scale_bits());
    let need = required_scale_bits(q_max);
    if scale < need {
        return Err(Error::PrecisionRange(format!(
            "Q = {q_max} needs scale_bits ≥ {need}, got {scale}"
        )));
    }
    Ok(())
}

/// Number of vectors in shell `n` (each with its admissible `p`) that satisfy
/// `‖q·α − γ‖ ≤ ψ(n)`, counting pairs `(p, q)`.
pub fn count_shell(
    alpha: &(FixedPoint, FixedPoint),
    n: u64,
    gamma: &IrrationalShift,
    psi: &ApproxFunction,
) -> Result<u64> {
    check_range(alpha, n)?;
    let point = Point::new(alpha, gamma)?;
    Ok(count_shell_at(&point, n, &psi.eval(n)?))
}

/// Shell contributions for `n = first ..= last`, computed in parallel and
/// returned in shell order.
pub fn count_shells(
    alpha: &(FixedPoint, FixedPoint),
    first: u64,
    last: u64,
    gamma: &IrrationalShift,
    psi: &ApproxFunction,
) -> Result<Vec<u64>> {
    if first == 0 || last < first {
        return Err(Error::InvalidArgument(format!("bad shell range {first}..={last}")));
    }
    check_range(alpha, last)?;
    let point = Point::new(alpha, gamma)?;
    let psis = psi.table_upto(last);
    Ok((first..=last)
        .into_par_iter()
        .map(|n| count_shell_at(&point, n, psis.get(n)))
        .collect())
}

/// `N(α, Q, γ) = #{(p, q) : 0 < |q| ≤ Q, |q·α − p − γ| ≤ ψ(|q|)}`.
pub fn count_solutions(
    alpha: &(FixedPoint, FixedPoint),
    q_max: u64,
    gamma: &IrrationalShift,
    psi: &ApproxFunction,
) -> Result<u64> {
    Ok(count_shells(alpha, 1, q_max, gamma, psi)?.iter().sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MainTermMode {
    /// `∑ |shell(q)|·2ψ(q)` with enumerated shell sizes.
    ExactShell,
    /// `16∑qψ(q) + 8∑ψ(q)`.
    Paper,
}

pub fn main_term(psi: &ApproxFunction, q_max: u64, mode: MainTermMode) -> Result<BigRational> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("Q must be ≥ 1".into()));
    }
    let table = psi.table_upto(q_max);
    let mut sum_q = BigRational::zero();
    let mut sum = BigRational::zero();
    for (q, v) in table.iter() {
        sum_q += v * BigRational::from_integer(shell_size(q).into());
        sum += v;
    }
    let two = BigRational::from_integer(2.into());
    Ok(match mode {
        MainTermMode::ExactShell => two * sum_q,
        MainTermMode::Paper => two * sum_q + BigRational::from_integer(8.into()) * sum,
    })
}

/// `χ(Q) = ∑_{0<|q|≤Q} ψ(|q|)·τ(gcd(q))`, with the gcd distribution of each
/// shell enumerated.
pub fn chi_term(psi: &ApproxFunction, q_max: u64) -> Result<BigRational> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("Q must be ≥ 1".into()));
    }
    let table = psi.table_upto(q_max);
    let weights: Vec<u64> = (1..=q_max)
        .into_par_iter()
        .map(|n| {
            if table.get(n).is_zero() {
                return 0;
            }
            gcd_histogram(n).iter().map(|(&d, &count)| count * tau(d)).sum()
        })
        .collect();
    Ok(table
        .iter()
        .zip(weights)
        .map(|((_, v), w)| v * BigRational::from_integer(w.into()))
        .sum())
}

/// `(N − Ψ)/(Ψ^{1/2}(ln Ψ)^{3/2+δ})`.
pub fn normalized_error(n: u64, psi_main: &BigRational, delta_log: &BigRational) -> Result<f64> {
    let psi_f = ratio_to_f64(psi_main);
    if !(psi_f > std::f64::consts::E) {
        return Err(Error::InvalidArgument(format!(
            "normalized error needs Ψ > e, got {psi_f}"
        )));
    }
    let diff = ratio_to_f64(&(BigRational::from_integer(n.into()) - psi_main));
    let expo = 1.5 + ratio_to_f64(delta_log);
    Ok(diff / (psi_f.sqrt() * psi_f.ln().powf(expo)))
}

/// One counting trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub seed: u64,
    pub trial: u64,
    #[serde(rename = "Q")]
    pub q_max: u64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(serialize_with = "ser_decimal")]
    pub psi_exact: BigRational,
    #[serde(serialize_with = "ser_decimal")]
    pub psi_paper: BigRational,
    #[serde(serialize_with = "ser_decimal")]
    pub chi: BigRational,
    /// Absent when `Ψ_exact ≤ e`.
    pub err_norm: Option<f64>,
    pub gamma_id: String,
    pub psi_id: String,
    pub alpha: (String, String),
}

/// Main terms and χ for a fixed `(ψ, Q)`; shared across trials.
#[derive(Clone, Debug)]
pub struct MainTerms {
    pub q_max: u64,
    pub psi_exact: BigRational,
    pub psi_paper: BigRational,
    pub chi: BigRational,
}

impl MainTerms {
    pub fn compute(psi: &ApproxFunction, q_max: u64) -> Result<Self> {
        Ok(MainTerms {
            q_max,
            psi_exact: main_term(psi, q_max, MainTermMode::ExactShell)?,
            psi_paper: main_term(psi, q_max, MainTermMode::Paper)?,
            chi: chi_term(psi, q_max)?,
        })
    }

    pub fn report(
        &self,
        seed: u64,
        trial: u64,
        n: u64,
        delta_log: &BigRational,
        gamma: &IrrationalShift,
        psi: &ApproxFunction,
        alpha: &(FixedPoint, FixedPoint),
    ) -> CountReport {
        CountReport {
            seed,
            trial,
            q_max: self.q_max,
            n,
            psi_exact: self.psi_exact.clone(),
            psi_paper: self.psi_paper.clone(),
            chi: self.chi.clone(),
            err_norm: normalized_error(n, &self.psi_exact, delta_log).ok(),
            gamma_id: gamma.id().to_string(),
            psi_id: psi.to_string(),
            alpha: (alpha.0.mantissa().to_str_radix(16), alpha.1.mantissa().to_str_radix(16)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{int, ratio};
    use crate::arith::{sample_torus_point, RngStream};

    fn alpha(seed: u64, scale: u32) -> (FixedPoint, FixedPoint) {
        sample_torus_point(&mut RngStream::new(seed), scale).unwrap()
    }

    /// Independent recount: exact rationals, `γ` at twice the scale, plain
    /// double loop over the box, and the count of `p` taken from the interval
    /// `[x − ψ, x + ψ]` directly.
    fn naive_count(a: &(FixedPoint, FixedPoint), q_max: u64, g: &IrrationalShift, psi: &ApproxFunction) -> u64 {
        let s = 2 * a.0.scale_bits();
        let gamma = g.surd().to_ratio_floor(s);
        let (x1, x2) = (a.0.to_ratio(), a.1.to_ratio());
        let m = q_max as i64;
        let mut total = 0;
        for q2 in -m..=m {
            for q1 in -m..=m {
                if q1 == 0 && q2 == 0 {
                    continue;
                }
                let norm = q1.unsigned_abs().max(q2.unsigned_abs());
                let p = psi.eval(norm).unwrap();
                let x = &x1 * int(q1) + &x2 * int(q2) - &gamma;
                let lo = rational::ceil(&(&x - &p));
                let hi = rational::floor(&(&x + &p));
                if hi >= lo {
                    total += (hi - lo + 1u32).to_string().parse::<u64>().unwrap();
                }
            }
        }
        total
    }

    #[test]
    fn matches_naive_recount() {
        let g = IrrationalShift::sqrt(2).unwrap();
        for spec in ["pow:1,3/4", "pow:1/4,1/2", "const:1/3", "window:3,9:pow:1,1"] {
            let psi = ApproxFunction::parse(spec).unwrap();
            for seed in 0..3 {
                for scale in [128u32, 192, 200] {
                    let a = alpha(seed, scale);
                    assert_eq!(
                        count_solutions(&a, 30, &g, &psi).unwrap(),
                        naive_count(&a, 30, &g, &psi),
                        "{spec} seed {seed} scale {scale}"
                    );
                }
            }
        }
    }

    #[test]
    fn trivial_functions() {
        let g = IrrationalShift::golden_ratio();
        let zero = ApproxFunction::parse("const:0").unwrap();
        let half = ApproxFunction::parse("const:1/2").unwrap();
        for seed in 0..100 {
            let a = alpha(seed, 192);
            assert_eq!(count_solutions(&a, 5, &g, &zero).unwrap(), 0);
            for q in [1u64, 5, 10] {
                let expect = (2 * q + 1).pow(2) - 1;
                assert_eq!(count_solutions(&a, q, &g, &half).unwrap(), expect);
            }
        }
    }

    #[test]
    fn ambiguous_comparisons_refine() {
        // α = 0 gives q·α − γ = −γ, and ψ(1) = 1 − frac(γ) truncated far below
        // the working scale leaves the first comparison undecided at 72 bits
        let g = IrrationalShift::sqrt(3).unwrap();
        let zero = (FixedPoint::zero(72).unwrap(), FixedPoint::zero(72).unwrap());
        let mut table = std::collections::BTreeMap::new();
        table.insert(1u64, BigRational::one() - g.frac_ratio(200));
        let psi = ApproxFunction::table(table).unwrap();
        assert_eq!(count_solutions(&zero, 1, &g, &psi).unwrap(), 8);
        table = std::collections::BTreeMap::new();
        table.insert(1u64, BigRational::one() - g.frac_ratio(200) - ratio(1, 1 << 62).pow(3));
        let psi = ApproxFunction::table(table).unwrap();
        assert_eq!(count_solutions(&zero, 1, &g, &psi).unwrap(), 0);
        table = std::collections::BTreeMap::new();
        table.insert(1u64, BigRational::one() - g.frac_ratio(200) + ratio(1, 1 << 62).pow(4));
        let psi = ApproxFunction::table(table).unwrap();
        assert_eq!(count_solutions(&zero, 1, &g, &psi).unwrap(), 8);
    }

    #[test]
    fn incremental_equals_recount() {
        let g = IrrationalShift::sqrt(3).unwrap();
        let psi = ApproxFunction::parse("pow:1,3/4").unwrap();
        for seed in 0..10 {
            let a = alpha(seed, 192);
            let shells = count_shells(&a, 1, 200, &g, &psi).unwrap();
            for q in [1u64, 17, 64, 150, 200] {
                let running: u64 = shells[..q as usize].iter().sum();
                assert_eq!(count_solutions(&a, q, &g, &psi).unwrap(), running);
            }
        }
    }

    #[test]
    fn monotone_in_q_and_psi() {
        let g = IrrationalShift::sqrt(5).unwrap();
        let small = ApproxFunction::parse("pow:1/2,1").unwrap();
        let large = ApproxFunction::parse("pow:1,3/4").unwrap();
        for seed in 0..5 {
            let a = alpha(seed, 192);
            let mut prev = 0;
            for q in 1..40 {
                let n = count_solutions(&a, q, &g, &small).unwrap();
                assert!(n >= prev);
                assert!(count_solutions(&a, q, &g, &large).unwrap() >= n);
                prev = n;
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let g = IrrationalShift::sqrt(2).unwrap();
        let psi = ApproxFunction::parse("pow:1,3/4").unwrap();
        let a = alpha(0, 64);
        assert!(matches!(count_solutions(&a, 10, &g, &psi), Err(Error::PrecisionRange(_))));
        assert!(matches!(count_solutions(&alpha(0, 192), 0, &g, &psi), Err(Error::InvalidArgument(_))));
        assert_eq!(required_scale_bits(2000), 64 + 12);
    }

    #[test]
    fn main_terms() {
        let half = ApproxFunction::parse("const:1/2").unwrap();
        assert_eq!(main_term(&half, 1, MainTermMode::ExactShell).unwrap(), int(8));
        assert_eq!(main_term(&half, 1, MainTermMode::Paper).unwrap(), int(12));
        let zero = ApproxFunction::parse("const:0").unwrap();
        assert_eq!(main_term(&zero, 50, MainTermMode::ExactShell).unwrap(), int(0));
        assert_eq!(main_term(&zero, 50, MainTermMode::Paper).unwrap(), int(0));
        let psi = ApproxFunction::parse("pow:1,1").unwrap();
        // ψ(q) = 1/q (capped at 1/2 for q = 1): Σ 16 q ψ + ...
        let exact = main_term(&psi, 3, MainTermMode::ExactShell).unwrap();
        assert_eq!(exact, int(16) * (ratio(1, 2) + int(1) + int(1)));
    }

    #[test]
    fn chi_examples() {
        let half = ApproxFunction::parse("const:1/2").unwrap();
        assert_eq!(chi_term(&half, 1).unwrap(), int(4));
        let zero = ApproxFunction::parse("const:0").unwrap();
        assert_eq!(chi_term(&zero, 10).unwrap(), int(0));
        // ψ supported at q = 2: shell 2 has 8 vectors with gcd 1 and 8 with gcd 2
        let mut t = std::collections::BTreeMap::new();
        t.insert(2u64, ratio(1, 7));
        let psi = ApproxFunction::table(t).unwrap();
        let brute: u64 = shell(2).iter().map(|v| tau(v.gcd())).sum();
        assert_eq!(brute, 8 + 8 * 2);
        assert_eq!(chi_term(&psi, 5).unwrap(), ratio(1, 7) * int(brute as i64));
        // χ ≥ Σ ψ(|q|)
        let psi = ApproxFunction::parse("pow:1,3/4").unwrap();
        let lower: BigRational = (1..=60u64)
            .map(|n| psi.eval(n).unwrap() * int(shell_size(n) as i64))
            .sum();
        assert!(chi_term(&psi, 60).unwrap() >= lower);
    }

    #[test]
    fn normalized_error_definition() {
        let psi = int(1000);
        let delta = ratio(1, 2);
        assert_eq!(normalized_error(1000, &psi, &delta).unwrap(), 0.0);
        let f = 1000f64;
        let unit = f.sqrt() * f.ln().powf(2.0);
        let n = (1000.0 + unit).round() as u64;
        let e = normalized_error(n, &psi, &delta).unwrap();
        assert!((e - (n as f64 - 1000.0) / unit).abs() < 1e-12);
        assert!(normalized_error(900, &psi, &delta).unwrap() < 0.0);
        assert!(normalized_error(1, &int(2), &delta).is_err());
    }
}
