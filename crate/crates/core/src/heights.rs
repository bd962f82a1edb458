//! Height functions on rational points and their exact comparison.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_bigint, F64Interval, Interval, RationalPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightKind {
    Max,
    Min,
    Prod,
    #[serde(rename = "prodroot", alias = "prod_d_root")]
    ProdRoot,
    Lcm,
}

impl HeightKind {
    pub const ALL: [HeightKind; 5] =
        [HeightKind::Max, HeightKind::Min, HeightKind::Prod, HeightKind::ProdRoot, HeightKind::Lcm];

    pub fn name(self) -> &'static str {
        match self {
            HeightKind::Max => "max",
            HeightKind::Min => "min",
            HeightKind::Prod => "prod",
            HeightKind::ProdRoot => "prodroot",
            HeightKind::Lcm => "lcm",
        }
    }

    /// Integer part Θ of the height: the d-th root for prodroot is applied
    /// separately through HeightValue::root.
    pub fn theta(self, qs: &[BigInt]) -> BigInt {
        assert!(!qs.is_empty());
        match self {
            HeightKind::Max => qs.iter().max().unwrap().clone(),
            HeightKind::Min => qs.iter().min().unwrap().clone(),
            HeightKind::Prod | HeightKind::ProdRoot => qs.iter().product(),
            HeightKind::Lcm => qs.iter().fold(BigInt::one(), |a, b| a.lcm(b)),
        }
    }

    /// Same as theta on machine integers, saturating at u128::MAX.
    pub fn theta_u64(self, qs: &[u64]) -> u128 {
        match self {
            HeightKind::Max => qs.iter().copied().max().unwrap() as u128,
            HeightKind::Min => qs.iter().copied().min().unwrap() as u128,
            HeightKind::Prod | HeightKind::ProdRoot => {
                qs.iter().fold(1u128, |a, &b| a.saturating_mul(b as u128))
            }
            HeightKind::Lcm => qs.iter().fold(1u128, |a, &b| lcm_sat(a, b as u128)),
        }
    }

    /// Θ extended to real vectors in the log domain (max, min, sum, mean).
    pub fn theta_log(self, logs: &[f64]) -> Option<f64> {
        match self {
            HeightKind::Max => logs.iter().cloned().reduce(f64::max),
            HeightKind::Min => logs.iter().cloned().reduce(f64::min),
            HeightKind::Prod => Some(logs.iter().sum()),
            HeightKind::ProdRoot => Some(logs.iter().sum::<f64>() / logs.len() as f64),
            HeightKind::Lcm => None,
        }
    }

    /// Root applied to Θ in dimension d.
    pub fn root(self, d: usize) -> u32 {
        match self {
            HeightKind::ProdRoot => d as u32,
            _ => 1,
        }
    }

    /// Θ is non-decreasing in every coordinate.
    pub fn is_monotone(self) -> bool {
        !matches!(self, HeightKind::Lcm)
    }
}

pub(crate) fn lcm_sat(a: u128, b: u128) -> u128 {
    let g = a.gcd(&b);
    (a / g).saturating_mul(b)
}

impl fmt::Display for HeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeightKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "max" => HeightKind::Max,
            "min" => HeightKind::Min,
            "prod" => HeightKind::Prod,
            "prodroot" | "prod_d_root" | "prod-d-root" => HeightKind::ProdRoot,
            "lcm" => HeightKind::Lcm,
            other => {
                return Err(Error::Parse(format!(
                    "unknown height kind {other:?} (expected max, min, prod, prodroot, lcm)"
                )))
            }
        })
    }
}

/// The real number base^(1/root), kept exact.
#[derive(Clone, Debug)]
pub struct HeightValue {
    base: BigInt,
    root: u32,
}

impl HeightValue {
    pub fn new(base: impl Into<BigInt>, root: u32) -> Result<Self> {
        let base = base.into();
        if !base.is_positive() || root == 0 {
            return Err(Error::Domain(format!("invalid height {base}^(1/{root})")));
        }
        Ok(HeightValue { base, root })
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        HeightValue::new(n, 1).expect("positive integer height")
    }

    pub fn base(&self) -> &BigInt {
        &self.base
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    /// Certified enclosure of ln(base)/root.
    pub fn log(&self) -> F64Interval {
        let l = ln_bigint(&self.base);
        if self.root == 1 {
            l
        } else {
            l.div(&F64Interval::point(self.root as f64))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.log().mid().exp()
    }

    /// Largest integer N <= self^e, i.e. floor(base^(e/root)).
    pub fn floor_pow(&self, e: u32) -> BigInt {
        let b = num_traits::pow(self.base.clone(), e as usize);
        b.nth_root(self.root)
    }

    /// Text form accepted by the CLI: "base" or "base/root".
    pub fn to_bound_string(&self) -> String {
        if self.root == 1 {
            self.base.to_string()
        } else {
            format!("{}/{}", self.base, self.root)
        }
    }
}

impl Ord for HeightValue {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.root == other.root {
            return self.base.cmp(&other.base);
        }
        let a = num_traits::pow(self.base.clone(), other.root as usize);
        let b = num_traits::pow(other.base.clone(), self.root as usize);
        a.cmp(&b)
    }
}

impl PartialOrd for HeightValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for HeightValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeightValue {}

impl fmt::Display for HeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.root == 1 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}^(1/{})", self.base, self.root)
        }
    }
}

impl FromStr for HeightValue {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad height bound {s:?} (expected <int> or <int>/<root>)"));
        let (b, r) = match s.trim().split_once('/') {
            Some((b, r)) => (b, r.trim().parse::<u32>().map_err(|_| bad())?),
            None => (s.trim(), 1),
        };
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        HeightValue::new(b, r).map_err(|_| bad())
    }
}

impl Serialize for HeightValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.to_bound_string())
    }
}

impl<'de> Deserialize<'de> for HeightValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Height of a rational point.
pub fn height(r: &RationalPoint, kind: HeightKind) -> HeightValue {
    assert!(r.dim() >= 1, "empty point");
    let qs = r.denominators();
    HeightValue { base: kind.theta(&qs), root: kind.root(r.dim()) }
}

/// Certified enclosure of ln H(r).
pub fn log_height(r: &RationalPoint, kind: HeightKind) -> F64Interval {
    height(r, kind).log()
}

/// Largest integer N such that Θ(q) <= N is equivalent to H(q) <= bound
/// in dimension d.
pub fn integer_cap(kind: HeightKind, bound: &HeightValue, d: usize) -> BigInt {
    bound.floor_pow(kind.root(d))
}

/// Dirichlet-type exponent for (kind, d) as a certified rational enclosure
/// of width below 1e-9.
pub fn fs_exponent(kind: HeightKind, d: usize) -> Result<Interval> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let exact = |p: i64, q: i64| Interval::point(BigRational::new(p.into(), q.into()));
    Ok(match kind {
        HeightKind::Min | HeightKind::ProdRoot => exact(2, 1),
        HeightKind::Prod => exact(2, d as i64),
        HeightKind::Lcm => exact(d as i64 + 1, d as i64),
        HeightKind::Max => {
            if d == 1 {
                return Err(Error::Domain("max-height exponent d/(d-1)^((d-1)/d) needs d >= 2".into()));
            }
            // v = d / (d-1)^((d-1)/d), certified through v^d = d^d / (d-1)^(d-1).
            let df = d as f64;
            let v = df / (df - 1.0).powf((df - 1.0) / df);
            let target = BigRational::new(
                num_traits::pow(BigInt::from(d), d),
                num_traits::pow(BigInt::from(d - 1), d - 1),
            );
            let mut eps = 1e-12;
            loop {
                let lo = BigRational::from_float(v - eps).unwrap();
                let hi = BigRational::from_float(v + eps).unwrap();
                if num_traits::pow(lo.clone(), d) <= target && target <= num_traits::pow(hi.clone(), d) {
                    return Ok(Interval::new(lo, hi));
                }
                eps *= 2.0;
            }
        }
    })
}

/// Integer cap as u64 when it fits.
pub fn integer_cap_u64(kind: HeightKind, bound: &HeightValue, d: usize) -> Option<u64> {
    integer_cap(kind, bound, d).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(pairs: &[(i64, i64)]) -> RationalPoint {
        RationalPoint::from_pairs(pairs).unwrap()
    }

    #[test]
    fn examples() {
        let r = pt(&[(5, 7)]);
        for k in HeightKind::ALL {
            assert_eq!(height(&r, k), HeightValue::integer(7));
        }
        let r = pt(&[(1, 2), (1, 3)]);
        assert_eq!(height(&r, HeightKind::Max), HeightValue::integer(3));
        assert_eq!(height(&r, HeightKind::Min), HeightValue::integer(2));
        assert_eq!(height(&r, HeightKind::Prod), HeightValue::integer(6));
        assert_eq!(height(&r, HeightKind::ProdRoot), HeightValue::new(6, 2).unwrap());
        assert_eq!(height(&r, HeightKind::Lcm), HeightValue::integer(6));
    }

    #[test]
    fn cross_power_order() {
        let a = HeightValue::new(6, 2).unwrap();
        assert!(a > HeightValue::integer(2));
        assert!(a < HeightValue::integer(3));
        assert_eq!(HeightValue::new(4, 2).unwrap(), HeightValue::integer(2));
        assert!(HeightValue::new(8, 3).unwrap() < HeightValue::new(5, 2).unwrap());
    }

    #[test]
    fn parse_bounds() {
        let h: HeightValue = "60/3".parse().unwrap();
        assert_eq!(h.base(), &BigInt::from(60));
        assert_eq!(h.root(), 3);
        assert!("0".parse::<HeightValue>().is_err());
        assert!("x/2".parse::<HeightValue>().is_err());
    }

    #[test]
    fn caps() {
        let b = HeightValue::integer(10);
        assert_eq!(integer_cap(HeightKind::Max, &b, 2), BigInt::from(10));
        assert_eq!(integer_cap(HeightKind::ProdRoot, &b, 2), BigInt::from(100));
        let b = HeightValue::new(60, 3).unwrap();
        assert_eq!(integer_cap(HeightKind::ProdRoot, &b, 3), BigInt::from(60));
        assert_eq!(integer_cap(HeightKind::Max, &b, 3), BigInt::from(3));
    }

    #[test]
    fn fs_values() {
        // v = 3 / 4^(1/3)
        let v = fs_exponent(HeightKind::Max, 3).unwrap();
        assert!(v.width() < BigRational::new(1.into(), 1_000_000_000.into()));
        assert!((v.mid_f64() - 3.0 / 4f64.cbrt()).abs() < 1e-11);
        assert!(fs_exponent(HeightKind::Max, 1).is_err());
        assert_eq!(fs_exponent(HeightKind::Lcm, 2).unwrap().mid_f64(), 1.5);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in HeightKind::ALL {
            assert_eq!(k.name().parse::<HeightKind>().unwrap(), k);
        }
        assert_eq!("prod_d_root".parse::<HeightKind>().unwrap(), HeightKind::ProdRoot);
    }
}
