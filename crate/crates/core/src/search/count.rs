use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{theta_cap, Ctx, DEFAULT_ENUM_CAP};
use crate::cf::CfStream;
use crate::error::{Error, Result};
use crate::heights::{HeightKind, HeightValue};
use crate::numerics::{cmp_disc_pow, RationalPoint, RealTarget, ReducedRational};

/// Partners in the min-height construction are searched below 2^256.
pub const DEFAULT_SECONDARY_CAP_BITS: u32 = 256;

/// Points stored alongside a count.
const STORED_POINTS: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct SolutionCount {
    pub count: usize,
    /// False when the count is a certified lower bound.
    pub exact: bool,
    pub points: Vec<RationalPoint>,
}

fn tau_parts(tau: &BigRational) -> Result<(u32, u32)> {
    if tau.is_negative() {
        return Err(Error::Domain(format!("exponent {tau} must be non-negative")));
    }
    match (tau.numer().to_u32(), tau.denom().to_u32()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Domain(format!("exponent {tau} has oversized terms"))),
    }
}

fn inside(ctx: &Ctx, j: usize, p: i64, q: u64, a: u32, b: u32) -> Result<bool> {
    let thr = (q as f64).powf(-(a as f64) / b as f64);
    let (lo, hi) = ctx.cs[j].ap.disc(p, q as i64);
    if hi < thr * (1.0 - 1e-12) {
        Ok(true)
    } else if lo > thr * (1.0 + 1e-12) {
        Ok(false)
    } else {
        let r = BigRational::new(BigInt::from(p), BigInt::from(q));
        Ok(cmp_disc_pow(ctx.cs[j].t, &r, &BigInt::from(q), a, b)? == Ordering::Less)
    }
}

/// Reduced p/q with q <= qmax and |x_j - p/q| < q^(-a/b), by increasing q.
fn one_dim(ctx: &Ctx, j: usize, qmax: u64, a: u32, b: u32, work: &mut u64) -> Result<Vec<(i64, u64)>> {
    if a >= 2 * b && !ctx.cs[j].t.is_exact() {
        return one_dim_cf(ctx, j, qmax, a, b);
    }
    let ap = ctx.cs[j].ap;
    let e = a as f64 / b as f64;
    let mut out = Vec::new();
    for q in 1..=qmax {
        *work += 1;
        if *work > ctx.enum_cap {
            return Err(Error::CapExceeded(format!(
                "solution scan exceeded {} steps",
                ctx.enum_cap
            )));
        }
        let qf = q as f64;
        let (plo, phi) = if a >= b {
            let f = ctx.floor_qx(j, q)?;
            (f, f + 1)
        } else {
            let w = qf.powf(1.0 - e);
            let y = qf * ap.mid;
            let lo = (y - w - 2.0 - y.abs() * 1e-14).floor() as i64;
            let hi = (y + w + 2.0 + y.abs() * 1e-14).ceil() as i64;
            *work += (hi - lo) as u64;
            (lo, hi)
        };
        for p in plo..=phi {
            if p.unsigned_abs().gcd(&q) == 1 && inside(ctx, j, p, q, a, b)? {
                out.push((p, q));
            }
        }
    }
    Ok(out)
}

/// Exponent >= 2 on an irrational coordinate: every p/q with |x - p/q| < q^-2
/// is a convergent or a mediant p_(n+1) +- p_n over q_(n+1) +- q_n (Fatou,
/// Grace), so only those are tested.
fn one_dim_cf(ctx: &Ctx, j: usize, qmax: u64, a: u32, b: u32) -> Result<Vec<(i64, u64)>> {
    let (shift, frac) = ctx.cs[j].t.fractional_part()?;
    let mut stream = CfStream::new(&frac)?;
    let limit = BigInt::from(qmax);
    let mut cands: Vec<(BigInt, BigInt)> = Vec::new();
    let mut offer = |prev: &(BigInt, BigInt), cur: &(BigInt, BigInt)| {
        cands.push(cur.clone());
        cands.push((&cur.0 + &prev.0, &cur.1 + &prev.1));
        cands.push((&cur.0 - &prev.0, &cur.1 - &prev.1));
    };
    offer(stream.previous(), stream.current());
    // stop once q_(n-1) > qmax, after which q_(n+1) - q_n > qmax as well
    while stream.previous().1 <= limit {
        if stream.next_quotient()?.is_none() {
            break;
        }
        offer(stream.previous(), stream.current());
    }
    let mut out = Vec::new();
    for (p, q) in cands {
        if !q.is_positive() || q > limit {
            continue;
        }
        let p = p + &shift * &q;
        let (Some(p), Some(q)) = (p.to_i64(), q.to_u64()) else { continue };
        if p.unsigned_abs().gcd(&q) == 1 && inside(ctx, j, p, q, a, b)? {
            out.push((p, q));
        }
    }
    out.sort_by_key(|&(p, q)| (q, p));
    out.dedup();
    Ok(out)
}

#[cfg(test)]
pub(crate) fn one_dim_linear(x: &RealTarget, qmax: u64, a: u32, b: u32) -> Result<Vec<(i64, u64)>> {
    let xs = [x.clone()];
    let ctx = Ctx::new(&xs, HeightKind::Max, u64::MAX)?;
    let mut out = Vec::new();
    for q in 1..=qmax {
        let f = ctx.floor_qx(0, q)?;
        for p in [f, f + 1] {
            if p.unsigned_abs().gcd(&q) == 1 && inside(&ctx, 0, p, q, a, b)? {
                out.push((p, q));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) fn one_dim_fast(x: &RealTarget, qmax: u64, a: u32, b: u32) -> Result<Vec<(i64, u64)>> {
    let xs = [x.clone()];
    let ctx = Ctx::new(&xs, HeightKind::Max, u64::MAX)?;
    one_dim_cf(&ctx, 0, qmax, a, b)
}

/// Number of rational points r with H(r) <= cap and |x - r| < H(r)^(-tau).
///
/// Exact for every kind except min, where the count is a lower bound
/// obtained from witness coordinates and convergent partners.
pub fn solutions_count(
    x: &[RealTarget],
    kind: HeightKind,
    tau: &BigRational,
    cap: &HeightValue,
) -> Result<SolutionCount> {
    solutions_count_with(x, kind, tau, cap, DEFAULT_ENUM_CAP, DEFAULT_SECONDARY_CAP_BITS)
}

pub fn solutions_count_with(
    x: &[RealTarget],
    kind: HeightKind,
    tau: &BigRational,
    cap: &HeightValue,
    enum_cap: u64,
    secondary_cap_bits: u32,
) -> Result<SolutionCount> {
    let (a, b) = tau_parts(tau)?;
    let ctx = Ctx::new(x, kind, enum_cap)?;
    let d = ctx.d();
    let m = theta_cap(kind, cap, d)?;
    let mut work = 0u64;
    if kind == HeightKind::Min && d >= 2 {
        return min_count(&ctx, m, a, b, secondary_cap_bits, &mut work);
    }
    if d == 1 {
        let list = one_dim(&ctx, 0, m, a, b, &mut work)?;
        let points: Vec<RationalPoint> = list
            .iter()
            .take(STORED_POINTS)
            .map(|&pq| ctx.point(&[pq]))
            .collect();
        return Ok(SolutionCount { count: list.len(), exact: true, points });
    }
    let root = kind.root(d);
    let (ea, eb) = (a, b * root);
    let lists: Vec<Vec<(i64, u64)>> =
        (0..d).map(|j| one_dim(&ctx, j, m, ea, eb, &mut work)).collect::<Result<_>>()?;
    let mut count = 0usize;
    let mut points = Vec::new();
    let mut chosen: Vec<(i64, u64)> = Vec::with_capacity(d);
    product(&ctx, &lists, m, a, b * root, &mut chosen, &mut work, &mut count, &mut points)?;
    Ok(SolutionCount { count, exact: true, points })
}

#[allow(clippy::too_many_arguments)]
fn product(
    ctx: &Ctx,
    lists: &[Vec<(i64, u64)>],
    m: u64,
    a: u32,
    b: u32,
    chosen: &mut Vec<(i64, u64)>,
    work: &mut u64,
    count: &mut usize,
    points: &mut Vec<RationalPoint>,
) -> Result<()> {
    let d = lists.len();
    let level = chosen.len();
    if level == d {
        *work += 1;
        if *work > ctx.enum_cap {
            return Err(Error::CapExceeded(format!("solution product exceeded {} tuples", ctx.enum_cap)));
        }
        let qs: Vec<u64> = chosen.iter().map(|x| x.1).collect();
        let theta = ctx.kind.theta_u64(&qs) as u64;
        let thr = (theta as f64).powf(-(a as f64) / b as f64);
        let theta_big = BigInt::from(theta);
        for (j, &(p, q)) in chosen.iter().enumerate() {
            let (lo, hi) = ctx.cs[j].ap.disc(p, q as i64);
            let ok = if hi < thr * (1.0 - 1e-12) {
                true
            } else if lo > thr * (1.0 + 1e-12) {
                false
            } else {
                let r = BigRational::new(BigInt::from(p), BigInt::from(q));
                cmp_disc_pow(ctx.cs[j].t, &r, &theta_big, a, b)? == Ordering::Less
            };
            if !ok {
                return Ok(());
            }
        }
        *count += 1;
        if points.len() < STORED_POINTS {
            points.push(ctx.point(chosen));
        }
        return Ok(());
    }
    for &(p, q) in &lists[level] {
        let mut qs: Vec<u64> = chosen.iter().map(|x| x.1).collect();
        qs.push(q);
        if ctx.kind.theta_u64(&qs) > m as u128 {
            continue;
        }
        chosen.push((p, q));
        product(ctx, lists, m, a, b, chosen, work, count, points)?;
        chosen.pop();
    }
    Ok(())
}

/// Convergents of one coordinate, extended on demand.
struct Partners<'a> {
    shift: BigInt,
    exact: Option<BigRational>,
    stream: Option<CfStream<'a>>,
    conv: Vec<(BigInt, BigInt)>,
    finished: bool,
}

impl<'a> Partners<'a> {
    fn new(frac: &'a RealTarget, shift: BigInt) -> Result<Self> {
        let exact = frac.exact_value().cloned();
        let zero = exact.as_ref().is_some_and(|v| v.is_zero());
        Ok(Partners {
            shift,
            exact,
            stream: if zero { None } else { Some(CfStream::new(frac)?) },
            conv: vec![(BigInt::zero(), BigInt::one())],
            finished: zero,
        })
    }

    fn get(&mut self, n: usize) -> Result<Option<(BigInt, BigInt)>> {
        while self.conv.len() <= n && !self.finished {
            let s = self.stream.as_mut().unwrap();
            match s.next_quotient()? {
                Some(_) => self.conv.push(s.current().clone()),
                None => self.finished = true,
            }
        }
        Ok(self.conv.get(n).cloned())
    }

    /// First convergent with q >= qi and |x - r| < qi^(-a/b); for rational
    /// coordinates, falls back to (P N + 1)/(Q N) with N = Q k.
    fn find(&mut self, x: &RealTarget, qi: u64, a: u32, b: u32, cap_bits: u32) -> Result<Option<ReducedRational>> {
        let qi_big = BigInt::from(qi);
        let mut n = 0;
        while let Some((p, q)) = self.get(n)? {
            if q.bits() > cap_bits as u64 {
                return Ok(None);
            }
            if q >= qi_big {
                let num = &p + &self.shift * &q;
                let r = BigRational::new(num.clone(), q.clone());
                if cmp_disc_pow(x, &r, &qi_big, a, b)? == Ordering::Less {
                    return Ok(Some(ReducedRational::from_coprime(num, q)));
                }
            }
            n += 1;
        }
        let Some(v) = &self.exact else { return Ok(None) };
        let (pp, qq) = (v.numer().clone(), v.denom().clone());
        let q2 = &qq * &qq;
        let qa = num_traits::pow(qi_big.clone(), a as usize);
        // smallest k with Q^2 k >= qi and (Q^2 k)^b > qi^a
        let mut k = (qa.nth_root(b) / &q2).max(qi_big.div_ceil(&q2)).max(BigInt::one());
        while num_traits::pow(&q2 * &k, b as usize) <= qa || &q2 * &k < qi_big {
            k += 1;
        }
        let den = &q2 * &k;
        if den.bits() > cap_bits as u64 {
            return Ok(None);
        }
        let num = &pp * &qq * &k + 1 + &self.shift * &den;
        Ok(Some(ReducedRational::from_coprime(num, den)))
    }
}

fn min_count(ctx: &Ctx, m: u64, a: u32, b: u32, cap_bits: u32, work: &mut u64) -> Result<SolutionCount> {
    let d = ctx.d();
    let fracs: Vec<(BigInt, RealTarget)> =
        ctx.cs.iter().map(|c| c.t.fractional_part()).collect::<Result<_>>()?;
    let mut partners: Vec<Partners> = fracs
        .iter()
        .map(|(s, f)| Partners::new(f, s.clone()))
        .collect::<Result<_>>()?;
    let mut seen: HashSet<RationalPoint> = HashSet::new();
    let mut points = Vec::new();
    for i in 0..d {
        let witnesses = one_dim(ctx, i, m, a, b, work)?;
        'w: for (p, q) in witnesses {
            let mut coords = Vec::with_capacity(d);
            for j in 0..d {
                if j == i {
                    coords.push(ReducedRational::from_coprime(p, q));
                    continue;
                }
                match partners[j].find(ctx.cs[j].t, q, a, b, cap_bits)? {
                    Some(r) => coords.push(r),
                    None => continue 'w,
                }
            }
            let pt = RationalPoint::new(coords);
            if seen.insert(pt.clone()) && points.len() < STORED_POINTS {
                points.push(pt);
            }
        }
    }
    Ok(SolutionCount { count: seen.len(), exact: false, points })
}
