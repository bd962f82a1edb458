use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Closed interval [lo, hi] with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn sub_scalar(&self, r: &BigRational) -> Interval {
        Interval { lo: &self.lo - r, hi: &self.hi - r }
    }

    pub fn mul_scalar(&self, r: &BigRational) -> Interval {
        let a = &self.lo * r;
        let b = &self.hi * r;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    /// Enclosure of {|t| : t in self}.
    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            Interval { lo: -&self.hi, hi: -&self.lo }
        } else {
            let m = if -&self.lo > self.hi { -&self.lo } else { self.hi.clone() };
            Interval { lo: BigRational::zero(), hi: m }
        }
    }

    /// Enclosure of {max(s, t)}.
    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Enclosure of {t^n} for a non-negative interval.
    pub fn pow_nonneg(&self, n: u32) -> Interval {
        assert!(!self.lo.is_negative());
        Interval {
            lo: num_traits::pow(self.lo.clone(), n as usize),
            hi: num_traits::pow(self.hi.clone(), n as usize),
        }
    }

    /// Certified order against another interval, if the two are disjoint or
    /// both degenerate.
    pub fn certain_cmp(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn certain_cmp_value(&self, x: &BigRational) -> Option<Ordering> {
        self.certain_cmp(&Interval::point(x.clone()))
    }

    /// Outward f64 enclosure.
    pub fn to_f64(&self) -> F64Interval {
        F64Interval::new(ratio_to_f64_down(&self.lo), ratio_to_f64_up(&self.hi))
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub fn ratio_to_f64_down(r: &BigRational) -> f64 {
    let v = r.to_f64().unwrap_or(f64::NEG_INFINITY);
    if v.is_finite() {
        v.next_down()
    } else {
        v
    }
}

pub fn ratio_to_f64_up(r: &BigRational) -> f64 {
    let v = r.to_f64().unwrap_or(f64::INFINITY);
    if v.is_finite() {
        v.next_up()
    } else {
        v
    }
}

/// Interval of f64 values rounded outward after every operation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct F64Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(v: f64) -> f64 {
    if v.is_finite() {
        v.next_down().next_down()
    } else {
        v
    }
}

fn up(v: f64) -> f64 {
    if v.is_finite() {
        v.next_up().next_up()
    } else {
        v
    }
}

impl F64Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "empty f64 interval [{lo}, {hi}]");
        F64Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        F64Interval { lo: v, hi: v }
    }

    /// Encloses an f64 that carries at most a couple of ulps of error.
    pub fn around(v: f64) -> Self {
        F64Interval { lo: down(v), hi: up(v) }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn overlaps(&self, other: &F64Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn add(&self, o: &F64Interval) -> Self {
        F64Interval { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }

    pub fn sub(&self, o: &F64Interval) -> Self {
        F64Interval { lo: down(self.lo - o.hi), hi: up(self.hi - o.lo) }
    }

    pub fn neg(&self) -> Self {
        F64Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(&self, o: &F64Interval) -> Self {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        F64Interval { lo: down(lo), hi: up(hi) }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.mul(&F64Interval::point(k))
    }

    /// Division by an interval not containing zero.
    pub fn div(&self, o: &F64Interval) -> Self {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by interval containing 0");
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        F64Interval { lo: down(lo), hi: up(hi) }
    }

    pub fn exp(&self) -> Self {
        F64Interval { lo: down(self.lo.exp()).max(0.0), hi: up(self.hi.exp()) }
    }

    /// Natural log; the interval must lie in [0, inf).
    pub fn ln(&self) -> Self {
        F64Interval { lo: down(self.lo.ln()), hi: up(self.hi.ln()) }
    }

    pub fn max(&self, o: &F64Interval) -> Self {
        F64Interval { lo: self.lo.max(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn min(&self, o: &F64Interval) -> Self {
        F64Interval { lo: self.lo.min(o.lo), hi: self.hi.min(o.hi) }
    }
}

impl fmt::Display for F64Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Certified enclosure of ln(n) for n > 0.
pub fn ln_bigint(n: &BigInt) -> F64Interval {
    assert!(n.sign() == Sign::Plus, "log of non-positive integer");
    let bits = n.bits();
    let shift = bits.saturating_sub(62);
    let m = (n >> shift).to_u64().expect("top bits fit in u64");
    // n lies in [m, m + 1) * 2^shift; both ends are exact in f64 up to 2^62.
    let lo_m = (m as f64).ln();
    let hi_m = if shift == 0 { lo_m } else { ((m + 1) as f64).ln() };
    let s = shift as f64 * std::f64::consts::LN_2;
    let slack = 4.0 * f64::EPSILON * (s.abs() + lo_m.abs() + 1.0);
    F64Interval { lo: down(lo_m + s - slack), hi: up(hi_m + s + slack) }
}

/// Certified enclosure of ln(r) for r > 0.
pub fn ln_ratio(r: &BigRational) -> F64Interval {
    ln_bigint(r.numer()).sub(&ln_bigint(r.denom()))
}

/// Certified enclosure of ln over a positive rational interval.
pub fn ln_interval(iv: &Interval) -> F64Interval {
    assert!(iv.lo().is_positive(), "log of interval touching 0");
    let a = ln_ratio(iv.lo());
    let b = ln_ratio(iv.hi());
    F64Interval { lo: a.lo, hi: b.hi }
}

impl serde::Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Interval", 2)?;
        st.serialize_field("lo", &self.lo.to_string())?;
        st.serialize_field("hi", &self.hi.to_string())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn abs_straddling_zero() {
        let iv = Interval::new(q(-1, 2), q(1, 3));
        assert_eq!(iv.abs(), Interval::new(q(0, 1), q(1, 2)));
        let iv = Interval::new(q(-3, 2), q(-1, 3));
        assert_eq!(iv.abs(), Interval::new(q(1, 3), q(3, 2)));
    }

    #[test]
    fn ln_encloses() {
        for n in [1u64, 2, 3, 10, 1 << 40, u64::MAX] {
            let iv = ln_bigint(&BigInt::from(n));
            let v = (n as f64).ln();
            assert!(iv.contains(v), "{n}: {iv}");
            assert!(iv.width() < 1e-12);
        }
        let big = num_traits::pow(BigInt::from(10), 400);
        let iv = ln_bigint(&big);
        assert!(iv.contains(400.0 * 10f64.ln()));
    }

    #[test]
    fn certain_cmp_detects_overlap() {
        let a = Interval::new(q(0, 1), q(1, 2));
        let b = Interval::new(q(1, 3), q(1, 1));
        assert_eq!(a.certain_cmp(&b), None);
        let c = Interval::new(q(2, 3), q(1, 1));
        assert_eq!(a.certain_cmp(&c), Some(Ordering::Less));
    }
}
