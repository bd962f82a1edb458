use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rational p/q with q > 0 and gcd(p, q) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedRational(BigRational);

impl ReducedRational {
    /// Reduces p/q. Fails on q = 0.
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let q = q.into();
        if q.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(ReducedRational(BigRational::new(p.into(), q)))
    }

    /// Builds p/q from a pair already known to be coprime with q > 0.
    pub fn from_coprime(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        let (p, q) = (p.into(), q.into());
        assert!(q.is_positive(), "denominator must be positive");
        assert!(p.gcd(&q).is_one(), "{p}/{q} is not reduced");
        ReducedRational(BigRational::new_raw(p, q))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        ReducedRational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        // BigRational keeps itself normalised unless built with new_raw.
        let (p, q) = r.into_raw();
        ReducedRational(BigRational::new(p, q))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Numerator and denominator as i64 when both fit.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        Some((self.numer().to_i64()?, self.denom().to_i64()?))
    }
}

impl fmt::Display for ReducedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for ReducedRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_exact(s).map(ReducedRational::from_ratio)
    }
}

impl Serialize for ReducedRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReducedRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses an exact rational from "p/q", an integer, or a terminating decimal
/// with optional exponent ("0.125", "-3.5e-2").
pub fn parse_exact(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let digits = digits / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// A point in Q^d, one reduced rational per coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalPoint(pub Vec<ReducedRational>);

impl RationalPoint {
    pub fn new(coords: Vec<ReducedRational>) -> Self {
        RationalPoint(coords)
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        pairs
            .iter()
            .map(|&(p, q)| ReducedRational::new(p, q))
            .collect::<Result<Vec<_>>>()
            .map(RationalPoint)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[ReducedRational] {
        &self.0
    }

    pub fn denominators(&self) -> Vec<BigInt> {
        self.0.iter().map(|r| r.denom().clone()).collect()
    }

    pub fn numerators(&self) -> Vec<BigInt> {
        self.0.iter().map(|r| r.numer().clone()).collect()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_on_construction() {
        let r = ReducedRational::new(6, -8).unwrap();
        assert_eq!(r.to_string(), "-3/4");
        assert!(ReducedRational::new(1, 0).is_err());
    }

    #[test]
    #[should_panic]
    fn from_coprime_rejects_unreduced() {
        ReducedRational::from_coprime(2, 4);
    }

    #[test]
    fn parses_literals() {
        let r: ReducedRational = "0.49".parse().unwrap();
        assert_eq!(r.to_string(), "49/100");
        let r: ReducedRational = "2/7".parse().unwrap();
        assert_eq!(r.to_string(), "2/7");
        let r: ReducedRational = "-1.5e-2".parse().unwrap();
        assert_eq!(r.to_string(), "-3/200");
        let r: ReducedRational = "12e3".parse().unwrap();
        assert_eq!(r.to_string(), "12000/1");
        assert!("abc".parse::<ReducedRational>().is_err());
        assert!(".".parse::<ReducedRational>().is_err());
    }
}
