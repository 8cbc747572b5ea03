use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith::{FixedPoint, FracFloor, QuadraticSurd};
use crate::error::{Error, Result};

use super::cf::{cf_expand, make_liouville, CFExpansion};

/// Irrational inhomogeneous shift `γ`, held exactly as a quadratic surd.
///
/// Every accepted form reduces to a surd: eventually periodic continued
/// fractions are quadratic irrationals, and the Liouville test numbers have a
/// periodic tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrrationalShift {
    surd: QuadraticSurd,
    expansion: Option<CFExpansion>,
    id: String,
}

impl IrrationalShift {
    pub fn from_surd(surd: QuadraticSurd) -> Result<Self> {
        if !surd.is_irrational() {
            return Err(Error::RationalShift(format!("{surd} is rational")));
        }
        let (a, b, r, d) = (surd.a(), surd.b(), surd.r(), surd.d());
        let id = format!("surd:{a},{b},{r},{d}");
        Ok(IrrationalShift {
            surd,
            expansion: None,
            id,
        })
    }

    pub fn from_cf(cf: CFExpansion) -> Result<Self> {
        let surd = cf.to_surd()?;
        let mut s = Self::from_surd(surd)?;
        s.expansion = Some(cf);
        Ok(s)
    }

    pub fn sqrt(n: u64) -> Result<Self> {
        let mut s = Self::from_surd(QuadraticSurd::sqrt(n)?)?;
        s.id = format!("sqrt:{n}");
        Ok(s)
    }

    pub fn golden_ratio() -> Self {
        Self::from_surd(QuadraticSurd::golden_ratio()).expect("irrational")
    }

    pub fn liouville(levels: usize) -> Result<Self> {
        let mut s = Self::from_cf(make_liouville(levels)?)?;
        s.id = format!("liouville:{levels}");
        Ok(s)
    }

    /// Parses `sqrt:n`, `surd:a,b,r,d`, `cf:a0,…;b1,…` or `liouville:k`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, body) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("γ spec needs a kind prefix: {spec:?}")))?;
        let bad = || Error::Parse(format!("malformed γ spec {spec:?}"));
        let mut out = match kind {
            "sqrt" => Self::sqrt(body.trim().parse().map_err(|_| bad())?)?,
            "surd" => {
                let parts: Vec<BigInt> = body
                    .split(',')
                    .map(|t| t.trim().parse::<BigInt>().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                let [a, b, r, d]: [BigInt; 4] = parts.try_into().map_err(|_| bad())?;
                Self::from_surd(QuadraticSurd::new(a, b, r, d)?)?
            }
            "cf" => Self::from_cf(CFExpansion::parse(body)?)?,
            "liouville" => Self::liouville(body.trim().parse().map_err(|_| bad())?)?,
            other => return Err(Error::Parse(format!("unknown γ kind {other:?}"))),
        };
        out.id = spec.to_string();
        Ok(out)
    }

    pub fn surd(&self) -> &QuadraticSurd {
        &self.surd
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Expansion with at least `k` quotients; the declared one when available.
    pub fn expansion(&self, k: usize) -> Result<CFExpansion> {
        match &self.expansion {
            Some(cf) => Ok(cf.clone()),
            None => cf_expand(&self.surd, k),
        }
    }

    pub fn frac_floor(&self, q: &BigInt, scale_bits: u32) -> FracFloor {
        self.surd.frac_floor(q, scale_bits)
    }

    /// `frac(γ)` rounded down to `scale_bits`.
    pub fn frac(&self, scale_bits: u32) -> Result<FixedPoint> {
        FixedPoint::new(self.frac_floor(&BigInt::from(1), scale_bits).floor, scale_bits)
    }

    /// `frac(γ)` rounded down, as an exact rational.
    pub fn frac_ratio(&self, scale_bits: u32) -> BigRational {
        BigRational::new(
            self.frac_floor(&BigInt::from(1), scale_bits).floor,
            BigInt::from(1) << scale_bits,
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.surd.to_f64()
    }
}

impl fmt::Display for IrrationalShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        let root2 = QuadraticSurd::sqrt(2).unwrap();
        for spec in ["sqrt:2", "surd:0,1,1,2", "cf:1;2", "cf:1;2,2,2", "surd:0,2,2,2"] {
            let s = IrrationalShift::parse(spec).unwrap();
            assert_eq!(s.surd(), &root2, "{spec}");
            assert_eq!(s.id(), spec);
        }
        let l = IrrationalShift::parse("liouville:2").unwrap();
        assert_eq!(l.expansion(4).unwrap().take(3)[0], BigInt::from(2));
        assert!(IrrationalShift::parse("sqrt:4").is_err());
        assert!(IrrationalShift::parse("surd:1,0,2,3").is_err());
        assert!(IrrationalShift::parse("cf:1,2").is_err());
        assert!(IrrationalShift::parse("pi").is_err());
        assert!(IrrationalShift::parse("surd:1,2").is_err());
    }

    #[test]
    fn frac_of_root2() {
        let s = IrrationalShift::sqrt(2).unwrap();
        let f = s.frac(64).unwrap().to_f64();
        assert!((f - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }
}
