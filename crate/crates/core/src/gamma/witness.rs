use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::rational::{self, ceil_root, pow, ratio};
use crate::error::{Error, Result};
use crate::psi::ApproxFunction;
use crate::report::{ser_opt_ratio, ser_ratio};

use super::shift::IrrationalShift;

pub const MAX_ETA: u32 = 10;
pub const MAX_C_LOG2: u32 = 64;
/// Every `q` up to this bound is checked directly, on top of the convergents.
pub const EXHAUSTIVE_Q: u64 = 100;

/// Range over which `‖qγ‖ ≥ 1/(c q^η)` has been certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessRange {
    UpTo(u64),
    /// Proven for all `q` from the minimal polynomial.
    Analytic,
}

/// `(C, ε)` with `ψ(q) ≤ min{C/q^ε, 1/2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiBound {
    #[serde(serialize_with = "ser_ratio")]
    pub big_c: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub epsilon: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonLiouvilleWitness {
    pub eta: u32,
    #[serde(serialize_with = "ser_ratio")]
    pub c: BigRational,
    pub psi_bound: Option<PsiBound>,
    pub range: WitnessRange,
}

impl NonLiouvilleWitness {
    pub fn new(
        eta: u32,
        c: BigRational,
        big_c: BigRational,
        epsilon: BigRational,
        range: WitnessRange,
    ) -> Result<Self> {
        if eta == 0 || !c.is_positive() || !big_c.is_positive() || !epsilon.is_positive() {
            return Err(Error::InvalidArgument(
                "witness needs η ≥ 1 and c, C, ε > 0".into(),
            ));
        }
        if epsilon.numer().to_u32().is_none() || epsilon.denom().to_u32().is_none() {
            return Err(Error::InvalidArgument("ε too large".into()));
        }
        Ok(NonLiouvilleWitness {
            eta,
            c,
            psi_bound: Some(PsiBound { big_c, epsilon }),
            range,
        })
    }

    fn bound(&self) -> Result<&PsiBound> {
        self.psi_bound.as_ref().ok_or_else(|| {
            Error::InvalidArgument("ψ has no power-law envelope (C, ε) for this witness".into())
        })
    }

    fn eps_parts(&self) -> Result<(u32, u32)> {
        let e = &self.bound()?.epsilon;
        Ok((e.numer().to_u32().unwrap(), e.denom().to_u32().unwrap()))
    }

    /// `M = ⌊(η+1)/ε⌋`.
    pub fn m(&self) -> Result<BigInt> {
        let eps = &self.bound()?.epsilon;
        Ok(rational::floor(&(BigRational::from_integer((self.eta + 1).into()) / eps)))
    }

    /// `K = (2Cc)^(1/ε) + 1` when it is rational, i.e. when `1/ε` is an integer.
    pub fn k_exact(&self) -> Result<Option<BigRational>> {
        let (num, den) = self.eps_parts()?;
        if num != 1 {
            return Ok(None);
        }
        let base = self.two_cc()?;
        Ok(Some(pow(&base, den) + BigRational::one()))
    }

    /// `⌈K⌉`.
    pub fn k_ceil(&self) -> Result<BigInt> {
        let (num, den) = self.eps_parts()?;
        let base = pow(&self.two_cc()?, den);
        Ok(ceil_root(&base, num) + 1u32)
    }

    fn two_cc(&self) -> Result<BigRational> {
        Ok(BigRational::from_integer(2.into()) * &self.bound()?.big_c * &self.c)
    }

    /// `‖qγ‖ ≥ 1/(c q^η)`, decided exactly.
    pub fn holds_at(&self, gamma: &IrrationalShift, q: u64) -> bool {
        let factor = &self.c * BigRational::from_integer(Pow::pow(BigInt::from(q), self.eta));
        compare_scaled_dist(gamma, &BigInt::from(q), &factor) != Ordering::Less
    }

    /// Validity on `1 ≤ q ≤ q_max`, checking every `q`.
    pub fn is_valid(&self, gamma: &IrrationalShift, psi: &ApproxFunction, q_max: u64) -> bool {
        (1..=q_max).all(|q| self.holds_at(gamma, q)) && self.psi_ok(psi, q_max)
    }

    /// `ψ(q) ≤ min{C/q^ε, 1/2}` on `1 ≤ q ≤ q_max`.
    pub fn psi_ok(&self, psi: &ApproxFunction, q_max: u64) -> bool {
        let Some(b) = &self.psi_bound else {
            return true;
        };
        let (num, den) = (
            b.epsilon.numer().to_u32().unwrap(),
            b.epsilon.denom().to_u32().unwrap(),
        );
        let c_pow = pow(&b.big_c, den);
        let half = ratio(1, 2);
        psi.table_upto(q_max).iter().all(|(q, v)| {
            *v <= half
                && pow(v, den) * BigRational::from_integer(Pow::pow(BigInt::from(q), num))
                    <= c_pow
        })
    }
}

/// Compares `factor · ‖qγ‖` with 1. Never equal for irrational `γ` and `q ≠ 0`.
fn compare_scaled_dist(gamma: &IrrationalShift, q: &BigInt, factor: &BigRational) -> Ordering {
    if q.is_zero() {
        return Ordering::Less;
    }
    let mut s = 128 + q.bits() as u32 + factor.numer().bits() as u32;
    loop {
        let l = dist_floor(gamma, q, s);
        let scale = BigRational::from_integer(BigInt::one() << s);
        let lo = factor * BigRational::from_integer(l.clone()) / &scale;
        let hi = factor * BigRational::from_integer(l + 1u32) / &scale;
        if lo >= BigRational::one() {
            return Ordering::Greater;
        }
        if hi <= BigRational::one() {
            return Ordering::Less;
        }
        s *= 2;
    }
}

/// `L` with `‖qγ‖ ∈ (L, L+1)/2^s`.
fn dist_floor(gamma: &IrrationalShift, q: &BigInt, s: u32) -> BigInt {
    let f = gamma.frac_floor(q, s).floor;
    let half = BigInt::one() << (s - 1);
    if &f + 1u32 <= half {
        f
    } else {
        (BigInt::one() << s) - f - 1u32
    }
}

/// Smallest `j ≥ 0` with `2^j · q^η · ‖qγ‖ ≥ 1`, or `None` above `MAX_C_LOG2`.
fn required_log2_c(gamma: &IrrationalShift, q: &BigInt, eta: u32) -> Option<u32> {
    let qe: BigInt = Pow::pow(q, eta);
    let mut s = 128 + qe.bits() as u32;
    // j for n/2^s: max(0, s − bits(n) + 1)
    let j_of = |n: &BigInt, s: u32| -> i64 { (s as i64 - n.bits() as i64 + 1).max(0) };
    loop {
        let l = dist_floor(gamma, q, s);
        let hi = &qe * (&l + 1u32);
        let j_hi = j_of(&hi, s);
        if j_hi > MAX_C_LOG2 as i64 {
            return None;
        }
        if !l.is_zero() {
            let j_lo = j_of(&(&qe * &l), s);
            if j_lo == j_hi {
                return Some(j_hi as u32);
            }
        }
        s *= 2;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FitReport {
    pub witness: NonLiouvilleWitness,
    /// Same `η = 1` bound proven for every `q`, for quadratic surds.
    pub analytic: Option<NonLiouvilleWitness>,
    /// Denominators that were checked.
    pub checked: usize,
}

/// The `q` that forces `c` past the cap for a given `η`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockingDenominator {
    pub eta: u32,
    #[serde(serialize_with = "crate::report::ser_display")]
    pub q: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessFailure {
    pub gamma: String,
    pub q_max: u64,
    pub max_eta: u32,
    pub blocking: Vec<BlockingDenominator>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WitnessFit {
    Found(FitReport),
    Failed(WitnessFailure),
}

impl WitnessFit {
    pub fn witness(&self) -> Option<&NonLiouvilleWitness> {
        match self {
            WitnessFit::Found(r) => Some(&r.witness),
            WitnessFit::Failed(_) => None,
        }
    }
}

/// Minimal `η ≤ 10`, then minimal power-of-two `c ≤ 2^64`, with
/// `‖qγ‖ ≥ 1/(c q^η)` on `q ≤ q_max`.
pub fn fit_witness(gamma: &IrrationalShift, psi: &ApproxFunction, q_max: u64) -> Result<WitnessFit> {
    fit_witness_with(gamma, psi, q_max, MAX_ETA)
}

pub fn fit_witness_with(
    gamma: &IrrationalShift,
    psi: &ApproxFunction,
    q_max: u64,
    max_eta: u32,
) -> Result<WitnessFit> {
    if q_max < 2 {
        return Err(Error::InvalidArgument("q_max must be ≥ 2".into()));
    }
    if max_eta == 0 {
        return Err(Error::InvalidArgument("max_eta must be ≥ 1".into()));
    }
    let candidates = candidate_denominators(gamma, q_max)?;
    let psi_bound = psi
        .power_law_envelope()
        .map(|(big_c, epsilon)| PsiBound { big_c, epsilon });
    let mut blocking = Vec::new();
    for eta in 1..=max_eta {
        let mut worst = Some(0u32);
        let mut blocker = None;
        for q in &candidates {
            match required_log2_c(gamma, q, eta) {
                Some(j) => {
                    if let Some(w) = worst.as_mut() {
                        *w = (*w).max(j);
                    }
                }
                None => {
                    worst = None;
                    blocker = Some(q.clone());
                    break;
                }
            }
        }
        match worst {
            Some(j) => {
                let witness = NonLiouvilleWitness {
                    eta,
                    c: BigRational::from_integer(BigInt::one() << j),
                    psi_bound: psi_bound.clone(),
                    range: WitnessRange::UpTo(q_max),
                };
                let analytic = gamma.surd().analytic_liouville_constant().map(|c| {
                    NonLiouvilleWitness {
                        eta: 1,
                        c: BigRational::from_integer(c),
                        psi_bound: psi_bound.clone(),
                        range: WitnessRange::Analytic,
                    }
                });
                return Ok(WitnessFit::Found(FitReport {
                    witness,
                    analytic,
                    checked: candidates.len(),
                }));
            }
            None => blocking.push(BlockingDenominator {
                eta,
                q: blocker.expect("set with worst = None"),
            }),
        }
    }
    Ok(WitnessFit::Failed(WitnessFailure {
        gamma: gamma.id().to_string(),
        q_max,
        max_eta,
        blocking,
    }))
}

/// `1, …, min(q_max, 100)` and every convergent denominator up to `q_max`.
fn candidate_denominators(gamma: &IrrationalShift, q_max: u64) -> Result<Vec<BigInt>> {
    let mut out: Vec<BigInt> = (1..=q_max.min(EXHAUSTIVE_Q)).map(BigInt::from).collect();
    let bound = BigInt::from(q_max);
    let k = 2 * (64 - q_max.leading_zeros() as usize) + 4;
    let cf = gamma.expansion(k)?;
    for (_, q) in cf.convergents() {
        if q > bound {
            break;
        }
        if q > BigInt::from(EXHAUSTIVE_Q) && !out.contains(&q) {
            out.push(q);
        }
    }
    Ok(out)
}

/// `⌈d^((η+1)/ε) · (2Cc)^(1/ε)⌉`: parallel overlaps vanish for `r` above it.
pub fn vanish_threshold(w: &NonLiouvilleWitness, d: u64) -> Result<BigInt> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be ≥ 1".into()));
    }
    let (num, den) = w.eps_parts()?;
    let x = BigRational::from_integer(Pow::pow(BigInt::from(d), w.eta + 1)) * w.two_cc()?;
    Ok(ceil_root(&pow(&x, den), num))
}

/// Serialized view with the derived `M`, `K`.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    #[serde(flatten)]
    pub witness: NonLiouvilleWitness,
    #[serde(serialize_with = "crate::report::ser_opt_display")]
    pub m: Option<BigInt>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub k_exact: Option<BigRational>,
    #[serde(serialize_with = "crate::report::ser_opt_display")]
    pub k_ceil: Option<BigInt>,
}

impl From<&NonLiouvilleWitness> for WitnessSummary {
    fn from(w: &NonLiouvilleWitness) -> Self {
        WitnessSummary {
            witness: w.clone(),
            m: w.m().ok(),
            k_exact: w.k_exact().ok().flatten(),
            k_ceil: w.k_ceil().ok(),
        }
    }
}
