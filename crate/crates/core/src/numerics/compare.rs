//! Certified comparisons of approximation errors |x - r|.
//!
//! Every decision first tries an f64 filter with a rigorous radius and only
//! falls back to exact rational refinement when the filter cannot separate
//! the two quantities.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::interval::{ln_bigint, ln_interval, F64Interval, Interval};
use super::target::RealTarget;
use crate::error::{Error, Result};

/// Precision schedule 64, 128, 256, ... capped at the budget.
pub(crate) fn schedule(budget: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(64.min(budget));
    std::iter::from_fn(move || {
        let b = next?;
        next = if b >= budget { None } else { Some((b * 2).min(budget)) };
        Some(b)
    })
}

fn ratio_f64(r: &BigRational) -> Option<f64> {
    let v = r.to_f64()?;
    (v.is_finite() && (v == 0.0 || v.abs() > 1e-290)).then_some(v)
}

/// Rigorous f64 enclosure of |x - r|, if one is available cheaply.
pub fn disc_filter(x: &RealTarget, r: &BigRational) -> Option<(f64, f64)> {
    let rf = ratio_f64(r)?;
    Some(x.approx().disc_f(rf))
}

/// Enclosure of |x - r| at the given refinement.
pub fn disc_interval(x: &RealTarget, r: &BigRational, bits: u32) -> Result<Interval> {
    Ok(x.refine(bits)?.sub_scalar(r).abs())
}

fn exhausted(what: &str, x: &RealTarget) -> Error {
    Error::PrecisionExhausted(format!("{what} for target {x} within {} bits", x.budget_bits()))
}

/// Compares |x - r| with |y - s|.
pub fn cmp_disc(x: &RealTarget, r: &BigRational, y: &RealTarget, s: &BigRational) -> Result<Ordering> {
    if r == s && x.spec() == y.spec() {
        return Ok(Ordering::Equal);
    }
    if let (Some(a), Some(b)) = (x.exact_value(), y.exact_value()) {
        return Ok((a - r).abs().cmp(&(b - s).abs()));
    }
    if let (Some(a), Some(b)) = (disc_filter(x, r), disc_filter(y, s)) {
        if a.1 < b.0 {
            return Ok(Ordering::Less);
        }
        if a.0 > b.1 {
            return Ok(Ordering::Greater);
        }
    }
    let budget = x.budget_bits().min(y.budget_bits());
    for bits in schedule(budget) {
        let a = disc_interval(x, r, bits)?;
        let b = disc_interval(y, s, bits)?;
        if let Some(o) = a.certain_cmp(&b) {
            return Ok(o);
        }
    }
    Err(exhausted("error comparison", x))
}

/// Compares |x - r| with a rational threshold t.
pub fn cmp_disc_value(x: &RealTarget, r: &BigRational, t: &BigRational) -> Result<Ordering> {
    if let Some(a) = x.exact_value() {
        return Ok((a - r).abs().cmp(t));
    }
    if let (Some(a), Some(tf)) = (disc_filter(x, r), ratio_f64(t)) {
        let slack = tf.abs() * 2.0 * f64::EPSILON;
        if a.1 < tf - slack {
            return Ok(Ordering::Less);
        }
        if a.0 > tf + slack {
            return Ok(Ordering::Greater);
        }
    }
    for bits in schedule(x.budget_bits()) {
        let a = disc_interval(x, r, bits)?;
        if let Some(o) = a.certain_cmp_value(t) {
            return Ok(o);
        }
    }
    Err(exhausted("threshold comparison", x))
}

/// Compares |x - r| with q^(-a/b) for integers q >= 1, a >= 0, b >= 1,
/// i.e. |x - r|^b against q^(-a).
pub fn cmp_disc_pow(x: &RealTarget, r: &BigRational, q: &BigInt, a: u32, b: u32) -> Result<Ordering> {
    assert!(b >= 1 && q.is_positive());
    let t = BigRational::new(BigInt::from(1), num_traits::pow(q.clone(), a as usize));
    let ln_t = ln_bigint(q).scale(-(a as f64) / b as f64);
    if let Some(v) = x.exact_value() {
        let e = (v - r).abs();
        return Ok(num_traits::pow(e, b as usize).cmp(&t));
    }
    if let Some((lo, hi)) = disc_filter(x, r) {
        if lo > 0.0 && hi.is_finite() {
            let ln_e = F64Interval::new(lo, hi).ln();
            if ln_e.hi < ln_t.lo {
                return Ok(Ordering::Less);
            }
            if ln_e.lo > ln_t.hi {
                return Ok(Ordering::Greater);
            }
        }
    }
    for bits in schedule(x.budget_bits()) {
        let e = disc_interval(x, r, bits)?;
        if e.lo().is_positive() {
            let ln_e = ln_interval(&e);
            let scaled = ln_e;
            if scaled.hi < ln_t.lo {
                return Ok(Ordering::Less);
            }
            if scaled.lo > ln_t.hi {
                return Ok(Ordering::Greater);
            }
            if let Some(o) = e.pow_nonneg(b).certain_cmp_value(&t) {
                return Ok(o);
            }
        } else if let Some(o) = e.pow_nonneg(b).certain_cmp_value(&t) {
            return Ok(o);
        }
    }
    Err(exhausted("power threshold comparison", x))
}

/// Relative width at which an error enclosure is considered final.
const REL_WIDTH_BITS: u64 = 48;

/// Deterministic certified enclosure of |x - r|: the coarsest scheduled
/// refinement that is exact or has relative width <= 2^-48.
pub fn certified_disc(x: &RealTarget, r: &BigRational) -> Result<Interval> {
    if let Some(v) = x.exact_value() {
        return Ok(Interval::point((v - r).abs()));
    }
    let mut last = None;
    for bits in schedule(x.budget_bits()) {
        let e = disc_interval(x, r, bits)?;
        if e.lo().is_positive() {
            let w = e.width();
            let scaled = w * BigRational::from_integer(BigInt::from(1) << REL_WIDTH_BITS);
            if &scaled <= e.lo() {
                return Ok(e);
            }
        }
        last = Some(e);
    }
    last.ok_or_else(|| exhausted("error enclosure", x))
}
