//! Approximation functions `ψ: ℕ → [0, 1/2]` and the scalar series built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::rational::{self, parse_rational, ratio};
use crate::error::{Error, Result};

/// Fractional bits kept when a power-law value is irrational (rounded down).
pub const PSI_GUARD_BITS: u32 = 192;

static CAP_LOGGED: AtomicBool = AtomicBool::new(false);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApproxFunction {
    /// `c₀ · q^(−a)`, capped at 1/2.
    PowerLaw {
        coefficient: BigRational,
        exponent: BigRational,
    },
    /// Finite support; zero elsewhere.
    Table(BTreeMap<u64, BigRational>),
    /// `min{1/(2q), f(q)}`.
    Clamp(Box<ApproxFunction>),
    /// `f(q)` on `lower ≤ q ≤ upper`, zero outside.
    Window {
        inner: Box<ApproxFunction>,
        lower: u64,
        upper: u64,
    },
}

impl ApproxFunction {
    pub fn power_law(coefficient: BigRational, exponent: BigRational) -> Result<Self> {
        if !coefficient.is_positive() {
            return Err(Error::InvalidArgument("power-law coefficient must be > 0".into()));
        }
        if exponent.is_negative() {
            return Err(Error::InvalidArgument("power-law exponent must be ≥ 0".into()));
        }
        if exponent.numer().to_u32().is_none() || exponent.denom().to_u32().is_none() {
            return Err(Error::InvalidArgument("power-law exponent too large".into()));
        }
        Ok(ApproxFunction::PowerLaw {
            coefficient,
            exponent,
        })
    }

    /// Constant function `v`, i.e. `PowerLaw(v, 0)`.
    pub fn constant(v: BigRational) -> Result<Self> {
        if v.is_zero() {
            return Ok(ApproxFunction::Table(BTreeMap::new()));
        }
        Self::power_law(v, BigRational::zero())
    }

    pub fn table(entries: BTreeMap<u64, BigRational>) -> Result<Self> {
        let half = ratio(1, 2);
        for (q, v) in &entries {
            if *q == 0 {
                return Err(Error::InvalidArgument("table keys must be ≥ 1".into()));
            }
            if v.is_negative() || *v > half {
                return Err(Error::InvalidArgument(format!(
                    "table value at q={q} outside [0, 1/2]"
                )));
            }
        }
        Ok(ApproxFunction::Table(entries))
    }

    pub fn clamp(inner: ApproxFunction) -> Self {
        ApproxFunction::Clamp(Box::new(inner))
    }

    pub fn window(inner: ApproxFunction, lower: u64, upper: u64) -> Result<Self> {
        if lower < 1 || upper < lower {
            return Err(Error::InvalidArgument(format!(
                "window bounds must satisfy 1 ≤ u ≤ v, got u={lower}, v={upper}"
            )));
        }
        Ok(ApproxFunction::Window {
            inner: Box::new(inner),
            lower,
            upper,
        })
    }

    /// Exact value at `q ≥ 1`.
    pub fn eval(&self, q: u64) -> Result<BigRational> {
        if q == 0 {
            return Err(Error::InvalidArgument("ψ is defined for q ≥ 1 only".into()));
        }
        Ok(self.eval_unchecked(q))
    }

    fn eval_unchecked(&self, q: u64) -> BigRational {
        match self {
            ApproxFunction::PowerLaw {
                coefficient,
                exponent,
            } => {
                let v = power_law_value(coefficient, exponent, q);
                let half = ratio(1, 2);
                if v > half {
                    if !CAP_LOGGED.swap(true, Ordering::Relaxed) {
                        log::info!("power-law ψ exceeds 1/2 at q={q}; capping at 1/2");
                    }
                    half
                } else {
                    v
                }
            }
            ApproxFunction::Table(map) => map.get(&q).cloned().unwrap_or_else(BigRational::zero),
            ApproxFunction::Clamp(inner) => {
                let v = inner.eval_unchecked(q);
                let cap = BigRational::new(BigInt::one(), BigInt::from(2 * q));
                if v < cap {
                    v
                } else {
                    cap
                }
            }
            ApproxFunction::Window { inner, lower, upper } => {
                if (*lower..=*upper).contains(&q) {
                    inner.eval_unchecked(q)
                } else {
                    BigRational::zero()
                }
            }
        }
    }

    /// `ψ(1), …, ψ(q_max)`; index 0 holds `ψ(1)`.
    pub fn table_upto(&self, q_max: u64) -> PsiTable {
        PsiTable {
            values: (1..=q_max).map(|q| self.eval_unchecked(q)).collect(),
        }
    }

    /// `(C, ε)` with `ψ(q) ≤ C q^(−ε)` read off a power-law core.
    pub fn power_law_envelope(&self) -> Option<(BigRational, BigRational)> {
        match self {
            ApproxFunction::PowerLaw {
                coefficient,
                exponent,
            } if exponent.is_positive() => Some((coefficient.clone(), exponent.clone())),
            ApproxFunction::Clamp(inner) | ApproxFunction::Window { inner, .. } => {
                inner.power_law_envelope()
            }
            _ => None,
        }
    }

    /// Parses `pow:c,a`, `const:v`, `table:PATH`, `clamp:SPEC`, `window:u,v:SPEC`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("ψ spec needs a kind prefix: {spec:?}")))?;
        match kind {
            "pow" => {
                let (c, a) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("expected pow:c,a, got {spec:?}")))?;
                Self::power_law(parse_rational(c)?, parse_rational(a)?)
            }
            "const" => Self::constant(parse_rational(rest)?),
            "table" => load_table_csv(Path::new(rest)),
            "clamp" => Ok(Self::clamp(Self::parse(rest)?)),
            "window" => {
                let mut parts = rest.splitn(2, ':');
                let bounds = parts.next().unwrap_or("");
                let inner = parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("expected window:u,v:SPEC, got {spec:?}")))?;
                let (u, v) = bounds
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("expected window:u,v:SPEC, got {spec:?}")))?;
                let u = u.trim().parse().map_err(|_| Error::Parse(format!("bad window bound {u:?}")))?;
                let v = v.trim().parse().map_err(|_| Error::Parse(format!("bad window bound {v:?}")))?;
                Self::window(Self::parse(inner)?, u, v)
            }
            other => Err(Error::Parse(format!("unknown ψ kind {other:?}"))),
        }
    }
}

impl fmt::Display for ApproxFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxFunction::PowerLaw {
                coefficient,
                exponent,
            } => write!(f, "pow:{coefficient},{exponent}"),
            ApproxFunction::Table(map) => write!(f, "table[{} entries]", map.len()),
            ApproxFunction::Clamp(inner) => write!(f, "clamp:{inner}"),
            ApproxFunction::Window { inner, lower, upper } => {
                write!(f, "window:{lower},{upper}:{inner}")
            }
        }
    }
}

/// `c₀ · q^(−num/den)`, exact when `q^num` is a perfect `den`-th power and
/// otherwise rounded down to `PSI_GUARD_BITS` fractional bits.
fn power_law_value(coefficient: &BigRational, exponent: &BigRational, q: u64) -> BigRational {
    if exponent.is_zero() {
        return coefficient.clone();
    }
    let num = exponent.numer().to_u32().expect("validated");
    let den = exponent.denom().to_u32().expect("validated");
    let q_num: BigInt = Pow::pow(BigInt::from(q), num);
    let root = q_num.nth_root(den);
    if Pow::pow(&root, den) == q_num {
        return coefficient / BigRational::from_integer(root);
    }
    // largest M with (M / 2^G)^den · q^num ≤ c₀^den
    let cn: BigInt = coefficient.numer() << PSI_GUARD_BITS;
    let cd = coefficient.denom();
    let top = Pow::pow(&cn, den);
    let bottom = q_num * Pow::pow(cd, den);
    let m = (top / bottom).nth_root(den);
    BigRational::new(m, BigInt::one() << PSI_GUARD_BITS)
}

/// Precomputed `ψ(1..=Q)`.
#[derive(Clone, Debug)]
pub struct PsiTable {
    values: Vec<BigRational>,
}

impl PsiTable {
    pub fn q_max(&self) -> u64 {
        self.values.len() as u64
    }

    /// `ψ(q)` for `1 ≤ q ≤ q_max`.
    pub fn get(&self, q: u64) -> &BigRational {
        &self.values[(q - 1) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.values.iter().enumerate().map(|(i, v)| (i as u64 + 1, v))
    }
}

/// Two-column CSV `q, value`; values may be decimals or fractions.
pub fn load_table_csv(path: &Path) -> Result<ApproxFunction> {
    let text = std::fs::read_to_string(path)?;
    parse_table_csv(&text)
}

pub fn parse_table_csv(text: &str) -> Result<ApproxFunction> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut map = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("table row {} must have 2 columns", i + 1)));
        }
        let q: u64 = match rec[0].parse() {
            Ok(q) => q,
            Err(_) if i == 0 => continue, // header
            Err(_) => return Err(Error::Parse(format!("bad q in table row {}", i + 1))),
        };
        map.insert(q, parse_rational(&rec[1])?);
    }
    ApproxFunction::table(map)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HausdorffExponent {
    /// Convergence exponent `t = 1 + 3/(a+1)`.
    #[serde(serialize_with = "crate::report::ser_ratio")]
    pub t: BigRational,
    /// `min{t, 2}`.
    #[serde(serialize_with = "crate::report::ser_ratio")]
    pub dimension: BigRational,
}

/// For `ψ(q) = c₀ q^(−a)`, `a > 0`: the term `q²(ψ(q)/q)^(s−1)` behaves like
/// `q^(2 − (a+1)(s−1))`, summable iff `s > 1 + 3/(a+1)`.
pub fn hausdorff_exponent(psi: &ApproxFunction) -> Result<HausdorffExponent> {
    let a = match psi {
        ApproxFunction::PowerLaw { exponent, .. } => exponent.clone(),
        _ => {
            return Err(Error::InvalidArgument(
                "hausdorff exponent needs a pure power law".into(),
            ))
        }
    };
    if !a.is_positive() {
        return Err(Error::InvalidArgument(
            "exponent a = 0: the series diverges for every s (t = ∞, dimension 2)".into(),
        ));
    }
    let t = rational::int(1) + rational::int(3) / (a + rational::int(1));
    let dimension = rational::min(&t, &rational::int(2));
    Ok(HausdorffExponent { t, dimension })
}

/// Partial sum `∑_{q ≤ n_max} q² (ψ(q)/q)^(s−1)` in double precision.
///
/// Reporting quantity only; no membership decision depends on it.
pub fn hausdorff_probe_sum(psi: &ApproxFunction, s: f64, n_max: u64) -> f64 {
    let (c0, a) = match psi {
        ApproxFunction::PowerLaw {
            coefficient,
            exponent,
        } => (
            crate::arith::fixed::ratio_to_f64(coefficient),
            crate::arith::fixed::ratio_to_f64(exponent),
        ),
        _ => panic!("probe defined for power laws"),
    };
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for q in 1..=n_max {
        let qf = q as f64;
        let psi_q = (c0 * qf.powf(-a)).min(0.5);
        let term = qf * qf * (psi_q / qf).powf(s - 1.0);
        // Kahan summation
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
