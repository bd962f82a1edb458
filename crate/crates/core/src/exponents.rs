//! Estimators for the irrationality exponent and the approximation constant
//! along record chains.

use std::cmp::Ordering;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::cf::ConvergentTable;
use crate::error::{Error, Result};
use crate::heights::{HeightKind, HeightValue};
use crate::numerics::{ln_interval, F64Interval, Interval, RationalPoint, RealTarget, ReducedRational};
use crate::search::{records, records_capped, ApproxRecord, DEFAULT_ENUM_CAP};

pub const DEFAULT_WARMUP: u64 = 100;

/// Records needed beyond the warm-up height.
const MIN_TAIL: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub height: HeightValue,
    pub value: F64Interval,
}

/// Record quotients -log|x - r| / log H(r) with their running maximum.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentTrace {
    pub kind: HeightKind,
    pub warmup: u64,
    /// Records of height > 1, by increasing height.
    pub entries: Vec<TraceEntry>,
    /// Index of the first entry at or above the warm-up height.
    pub tail_start: usize,
    /// Running maximum over entries[tail_start..].
    pub running_max: Vec<F64Interval>,
    /// Reported estimate: quotient of the last record beyond warm-up.
    pub estimate: F64Interval,
    /// Per-coordinate d=1 traces (min height only).
    pub coordinates: Vec<ExponentTrace>,
}

impl ExponentTrace {
    pub fn tail(&self) -> &[TraceEntry] {
        &self.entries[self.tail_start..]
    }

    pub fn running_max_final(&self) -> F64Interval {
        *self.running_max.last().expect("non-empty tail")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_trace_csv(&self.entries, "quotient", w)
    }
}

/// Ratios |x - r| H(r)^tau with their running minimum.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantTrace {
    pub kind: HeightKind,
    #[serde(serialize_with = "crate::cf::ser_display")]
    pub tau: BigRational,
    pub warmup: u64,
    pub entries: Vec<TraceEntry>,
    pub tail_start: usize,
    /// Running minimum over entries[tail_start..].
    pub running_min: Vec<F64Interval>,
    pub estimate: F64Interval,
    pub coordinates: Vec<ConstantTrace>,
}

impl ConstantTrace {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_trace_csv(&self.entries, "ratio", w)
    }
}

fn write_trace_csv<W: Write>(entries: &[TraceEntry], name: &str, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["height_base", "height_root", &format!("{name}_lo"), &format!("{name}_hi")])?;
    for e in entries {
        wr.write_record([
            e.height.base().to_string(),
            e.height.root().to_string(),
            format!("{:.17e}", e.value.lo),
            format!("{:.17e}", e.value.hi),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Certified -log(error) / log(height); None at height 1.
pub fn quotient(error: &Interval, height: &HeightValue) -> Option<F64Interval> {
    let lh = height.log();
    if lh.lo <= 0.0 {
        return None;
    }
    if error.lo() <= &BigRational::from_integer(0.into()) {
        return Some(F64Interval::new(f64::INFINITY, f64::INFINITY));
    }
    Some(ln_interval(error).neg().div(&lh))
}

/// Certified error * height^tau.
pub fn ratio(error: &Interval, height: &HeightValue, tau: &BigRational) -> F64Interval {
    let hp = height.log().mul(&tau_interval(tau)).exp();
    if error.lo() <= &BigRational::from_integer(0.into()) {
        return F64Interval::new(0.0, error.to_f64().hi * hp.hi);
    }
    ln_interval(error).add(&height.log().mul(&tau_interval(tau))).exp()
}

fn tau_interval(tau: &BigRational) -> F64Interval {
    Interval::point(tau.clone()).to_f64()
}

fn tail_start(recs: &[ApproxRecord], warmup: u64) -> usize {
    let w = HeightValue::integer(warmup.max(1));
    recs.iter().position(|r| r.height >= w).unwrap_or(recs.len())
}

fn insufficient(n: usize, warmup: u64) -> Error {
    Error::InsufficientData(format!(
        "{n} records at height >= {warmup}; at least {MIN_TAIL} are needed"
    ))
}

fn running<F: Fn(&F64Interval, &F64Interval) -> F64Interval>(vals: &[F64Interval], f: F) -> Vec<F64Interval> {
    let mut out: Vec<F64Interval> = Vec::with_capacity(vals.len());
    for v in vals {
        let next = match out.last() {
            None => *v,
            Some(prev) => f(prev, v),
        };
        out.push(next);
    }
    out
}

fn exponent_trace_from(kind: HeightKind, recs: &[ApproxRecord], warmup: u64) -> Result<ExponentTrace> {
    let recs: Vec<&ApproxRecord> = recs.iter().filter(|r| r.height > HeightValue::integer(1)).collect();
    let entries: Vec<TraceEntry> = recs
        .iter()
        .map(|r| TraceEntry { height: r.height.clone(), value: quotient(&r.error, &r.height).unwrap() })
        .collect();
    let w = HeightValue::integer(warmup.max(1));
    let start = entries.iter().position(|e| e.height >= w).unwrap_or(entries.len());
    let tail: Vec<F64Interval> = entries[start..].iter().map(|e| e.value).collect();
    if tail.len() < MIN_TAIL {
        return Err(insufficient(tail.len(), warmup));
    }
    let running_max = running(&tail, |a, b| a.max(b));
    Ok(ExponentTrace {
        kind,
        warmup,
        estimate: *tail.last().unwrap(),
        entries,
        tail_start: start,
        running_max,
        coordinates: Vec::new(),
    })
}

fn combine_max(kind: HeightKind, warmup: u64, coords: Vec<ExponentTrace>) -> ExponentTrace {
    let mut all: Vec<TraceEntry> = coords.iter().flat_map(|c| c.entries.iter().cloned()).collect();
    all.sort_by(|a, b| a.height.cmp(&b.height));
    let mut entries: Vec<TraceEntry> = Vec::new();
    for e in all {
        match entries.last_mut() {
            Some(last) if last.height == e.height => last.value = last.value.max(&e.value),
            _ => entries.push(e),
        }
    }
    let w = HeightValue::integer(warmup.max(1));
    let start = entries.iter().position(|e| e.height >= w).unwrap_or(entries.len());
    let tail: Vec<F64Interval> = entries[start..].iter().map(|e| e.value).collect();
    let running_max = running(&tail, |a, b| a.max(b));
    let estimate = coords.iter().map(|c| c.estimate).reduce(|a, b| a.max(&b)).expect("d >= 1");
    ExponentTrace { kind, warmup, entries, tail_start: start, running_max, estimate, coordinates: coords }
}

/// Exponent estimate from the record chain up to the height cap.
pub fn omega_estimate(x: &[RealTarget], kind: HeightKind, cap: &HeightValue) -> Result<ExponentTrace> {
    omega_estimate_with(x, kind, cap, DEFAULT_WARMUP)
}

pub fn omega_estimate_with(
    x: &[RealTarget],
    kind: HeightKind,
    cap: &HeightValue,
    warmup: u64,
) -> Result<ExponentTrace> {
    omega_estimate_capped(x, kind, cap, warmup, DEFAULT_ENUM_CAP)
}

pub fn omega_estimate_capped(
    x: &[RealTarget],
    kind: HeightKind,
    cap: &HeightValue,
    warmup: u64,
    enum_cap: u64,
) -> Result<ExponentTrace> {
    if kind == HeightKind::Min {
        let coords = x
            .iter()
            .map(|t| omega_estimate_capped(std::slice::from_ref(t), HeightKind::Max, cap, warmup, enum_cap))
            .collect::<Result<Vec<_>>>()?;
        return Ok(combine_max(kind, warmup, coords));
    }
    let recs = records_capped(x, kind, cap, enum_cap)?;
    exponent_trace_from(kind, &recs, warmup)
}

/// Exponent trace for an already computed record chain.
pub fn exponent_trace(kind: HeightKind, recs: &[ApproxRecord], warmup: u64) -> Result<ExponentTrace> {
    exponent_trace_from(kind, recs, warmup)
}

fn constant_trace_from(
    kind: HeightKind,
    tau: &BigRational,
    recs: &[ApproxRecord],
    warmup: u64,
) -> Result<ConstantTrace> {
    let entries: Vec<TraceEntry> = recs
        .iter()
        .map(|r| TraceEntry { height: r.height.clone(), value: ratio(&r.error, &r.height, tau) })
        .collect();
    let start = tail_start(recs, warmup);
    let tail: Vec<F64Interval> = entries[start..].iter().map(|e| e.value).collect();
    if tail.len() < MIN_TAIL {
        return Err(insufficient(tail.len(), warmup));
    }
    let running_min = running(&tail, |a, b| a.min(b));
    Ok(ConstantTrace {
        kind,
        tau: tau.clone(),
        warmup,
        estimate: *running_min.last().unwrap(),
        entries,
        tail_start: start,
        running_min,
        coordinates: Vec::new(),
    })
}

/// Running minimum of |x - r| H(r)^tau along the record chain.
pub fn c_estimate(x: &[RealTarget], kind: HeightKind, tau: &BigRational, cap: &HeightValue) -> Result<ConstantTrace> {
    c_estimate_with(x, kind, tau, cap, DEFAULT_WARMUP)
}

pub fn c_estimate_with(
    x: &[RealTarget],
    kind: HeightKind,
    tau: &BigRational,
    cap: &HeightValue,
    warmup: u64,
) -> Result<ConstantTrace> {
    if tau < &BigRational::from_integer(0.into()) {
        return Err(Error::Domain(format!("tau = {tau} must be non-negative")));
    }
    if kind == HeightKind::Min {
        let coords = x
            .iter()
            .map(|t| c_estimate_with(std::slice::from_ref(t), HeightKind::Max, tau, cap, warmup))
            .collect::<Result<Vec<_>>>()?;
        let mut all: Vec<TraceEntry> = coords.iter().flat_map(|c| c.entries.iter().cloned()).collect();
        all.sort_by(|a, b| a.height.cmp(&b.height));
        let mut entries: Vec<TraceEntry> = Vec::new();
        for e in all {
            match entries.last_mut() {
                Some(last) if last.height == e.height => last.value = last.value.min(&e.value),
                _ => entries.push(e),
            }
        }
        let w = HeightValue::integer(warmup.max(1));
        let start = entries.iter().position(|e| e.height >= w).unwrap_or(entries.len());
        let tail: Vec<F64Interval> = entries[start..].iter().map(|e| e.value).collect();
        let running_min = running(&tail, |a, b| a.min(b));
        let estimate = coords.iter().map(|c| c.estimate).reduce(|a, b| a.min(&b)).expect("d >= 1");
        return Ok(ConstantTrace {
            kind,
            tau: tau.clone(),
            warmup,
            entries,
            tail_start: start,
            running_min,
            estimate,
            coordinates: coords,
        });
    }
    let recs = records(x, kind, cap)?;
    constant_trace_from(kind, tau, &recs, warmup)
}

/// max(a/b, b/a) compared exactly: is |log a - log c| < |log b - log c|?
fn log_closer(a: &BigInt, b: &BigInt, c: &BigInt) -> Ordering {
    // distance of x from c in log scale is max(x, c)/min(x, c)
    let (an, ad) = if a >= c { (a, c) } else { (c, a) };
    let (bn, bd) = if b >= c { (b, c) } else { (c, b) };
    (an * bd).cmp(&(bn * ad))
}

/// Candidate points pairing the n-th convergent of the first coordinate
/// with the convergent of each other coordinate closest in log-denominator.
pub fn matched_tuples(tables: &[ConvergentTable], depth: usize) -> Result<Vec<RationalPoint>> {
    if tables.is_empty() || depth == 0 {
        return Err(Error::Domain("matched_tuples needs at least one table and depth >= 1".into()));
    }
    let mut out: Vec<RationalPoint> = Vec::new();
    let n_max = depth.min(tables[0].len());
    for n1 in 1..=n_max {
        let q = &tables[0].entries[n1 - 1].q;
        let mut coords = vec![ReducedRational::from_coprime(
            tables[0].entries[n1 - 1].p.clone(),
            q.clone(),
        )];
        for t in &tables[1..] {
            let mut best = match t.entries.first() {
                Some(e) => e,
                None => return Err(Error::Domain("empty convergent table".into())),
            };
            for e in &t.entries[1..] {
                if log_closer(&e.q, &best.q, q) == Ordering::Less {
                    best = e;
                }
            }
            coords.push(ReducedRational::from_coprime(best.p.clone(), best.q.clone()));
        }
        let pt = RationalPoint::new(coords);
        if !out.contains(&pt) {
            out.push(pt);
        }
    }
    Ok(out)
}
