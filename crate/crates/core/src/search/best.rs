use std::cmp::Ordering;

use num_integer::Integer;

use super::table::{build_table, BestEntry};
use super::{theta_cap, ApproxRecord, Atom, Ctx, DEFAULT_ENUM_CAP};
use crate::error::{Error, Result};
use crate::heights::{HeightKind, HeightValue};
use crate::numerics::RealTarget;

fn unbounded(kind: HeightKind) -> Error {
    Error::UnboundedSearch(format!(
        "{kind} height bounds only one coordinate's denominator; the search space is infinite"
    ))
}

/// Coprime nearest numerators floor(q x_j), ceil(q x_j).
#[derive(Clone, Copy, Debug, Default)]
struct Cands {
    n: u8,
    p: [i64; 2],
}

impl Cands {
    fn as_slice(&self) -> &[i64] {
        &self.p[..self.n as usize]
    }
}

fn nearest_cands(ctx: &Ctx, j: usize, q: u64) -> Result<Cands> {
    let f = ctx.floor_qx(j, q)?;
    let integral = match ctx.cs[j].t.exact_value() {
        Some(v) => (v * num_rational::BigRational::from_integer(q.into())).is_integer(),
        None => false,
    };
    let mut c = Cands::default();
    let opts: &[i64] = if integral { &[f][..] } else { &[f, f + 1][..] };
    for &p in opts {
        if p.unsigned_abs().gcd(&q) == 1 {
            c.p[c.n as usize] = p;
            c.n += 1;
        }
    }
    Ok(c)
}

/// Lexicographic tie-break on numerators, then denominators.
fn lex_key(pq: &[(i64, u64)]) -> (Vec<i64>, Vec<u64>) {
    (pq.iter().map(|x| x.0).collect(), pq.iter().map(|x| x.1).collect())
}

struct Brute<'c, 'a> {
    ctx: &'c Ctx<'a>,
    m: u64,
    cache: Option<Vec<Vec<Cands>>>,
    count: u64,
    best: Option<(Vec<Atom>, Vec<(i64, u64)>, f64)>,
}

impl Brute<'_, '_> {
    fn cands(&self, j: usize, q: u64) -> Result<Cands> {
        match &self.cache {
            Some(c) => Ok(c[j][q as usize]),
            None => nearest_cands(self.ctx, j, q),
        }
    }

    fn rec(&mut self, qs: &mut Vec<u64>, acc: u128) -> Result<()> {
        let d = self.ctx.d();
        let level = qs.len();
        if level == d {
            self.count += 1;
            if self.count > self.ctx.enum_cap {
                return Err(Error::CapExceeded(format!(
                    "brute force visited more than {} denominator tuples",
                    self.ctx.enum_cap
                )));
            }
            return self.leaf(qs);
        }
        let kind = self.ctx.kind;
        let top = match kind {
            HeightKind::Prod | HeightKind::ProdRoot => (self.m as u128 / acc) as u64,
            _ => self.m,
        };
        for q in 1..=top {
            let next = match kind {
                HeightKind::Prod | HeightKind::ProdRoot => acc * q as u128,
                HeightKind::Lcm => {
                    let l = crate::heights::lcm_sat(acc, q as u128);
                    if l > self.m as u128 {
                        if level + 1 == d {
                            self.count += 1;
                        }
                        continue;
                    }
                    l
                }
                _ => acc,
            };
            qs.push(q);
            self.rec(qs, next)?;
            qs.pop();
        }
        Ok(())
    }

    fn leaf(&mut self, qs: &[u64]) -> Result<()> {
        let d = qs.len();
        let mut cs = Vec::with_capacity(d);
        for (j, &q) in qs.iter().enumerate() {
            let c = self.cands(j, q)?;
            if c.n == 0 {
                return Ok(());
            }
            cs.push(c);
        }
        let mut idx = vec![0usize; d];
        loop {
            let atoms: Vec<Atom> =
                (0..d).map(|j| Atom { j, p: cs[j].as_slice()[idx[j]], q: qs[j] }).collect();
            self.offer(atoms)?;
            let mut j = 0;
            while j < d {
                idx[j] += 1;
                if idx[j] < cs[j].n as usize {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == d {
                return Ok(());
            }
        }
    }

    fn offer(&mut self, atoms: Vec<Atom>) -> Result<()> {
        let (mut lo, mut hi) = (0f64, 0f64);
        for &a in &atoms {
            let (l, h) = self.ctx.disc_f(a);
            lo = lo.max(l);
            hi = hi.max(h);
        }
        let pq: Vec<(i64, u64)> = atoms.iter().map(|a| (a.p, a.q)).collect();
        let better = match &self.best {
            None => true,
            Some((_, _, best_hi)) if lo > *best_hi => false,
            Some((batoms, bpq, _)) => match self.ctx.cmp_points(&atoms, batoms)? {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => lex_key(&pq) < lex_key(bpq),
            },
        };
        if better {
            self.best = Some((atoms, pq, hi));
        }
        Ok(())
    }
}

/// Exhaustive minimiser of the sup-norm error over points with
/// H(r) <= bound, numerators restricted to floor/ceil(q x_j).
pub fn brute_force_best(x: &[RealTarget], kind: HeightKind, bound: &HeightValue) -> Result<ApproxRecord> {
    brute_force_best_capped(x, kind, bound, DEFAULT_ENUM_CAP)
}

pub fn brute_force_best_capped(
    x: &[RealTarget],
    kind: HeightKind,
    bound: &HeightValue,
    enum_cap: u64,
) -> Result<ApproxRecord> {
    if kind == HeightKind::Min {
        return Err(unbounded(kind));
    }
    let ctx = Ctx::new(x, kind, enum_cap)?;
    let d = ctx.d();
    let m = theta_cap(kind, bound, d)?;
    if matches!(kind, HeightKind::Max | HeightKind::Lcm) && (m as f64).powi(d as i32) > 4.0 * enum_cap as f64 {
        return Err(Error::CapExceeded(format!(
            "{m}^{d} denominator tuples exceed the enumeration cap {enum_cap}"
        )));
    }
    if matches!(kind, HeightKind::Prod | HeightKind::ProdRoot) && d >= 2 {
        // tuples with q_1...q_d <= m number about m (ln m)^(d-1) / (d-1)!
        let lm = (m as f64).ln().max(1.0);
        let est = (m as f64) * lm.powi(d as i32 - 1) / (1..d).map(|k| k as f64).product::<f64>();
        if est > 4.0 * enum_cap as f64 {
            return Err(Error::CapExceeded(format!(
                "about {est:.3e} denominator tuples with product <= {m} exceed the enumeration cap {enum_cap}"
            )));
        }
    }
    let cache = if d >= 2 && m <= 1 << 21 {
        let mut all = Vec::with_capacity(d);
        for j in 0..d {
            let mut v = vec![Cands::default(); m as usize + 1];
            for q in 1..=m {
                v[q as usize] = nearest_cands(&ctx, j, q)?;
            }
            all.push(v);
        }
        Some(all)
    } else {
        None
    };
    let mut b = Brute { ctx: &ctx, m, cache, count: 0, best: None };
    b.rec(&mut Vec::with_capacity(d), 1)?;
    let (_, pq, _) = b.best.ok_or_else(|| Error::Domain("no admissible point under the bound".into()))?;
    ctx.record(&pq)
}

/// Walks the union of per-coordinate table errors in decreasing order.
/// At each threshold E the callback receives the positions of the minimal
/// denominators c_j(E) and the atom carrying E; it returns false to stop.
pub(crate) fn sweep<F>(ctx: &Ctx, tables: &[Vec<BestEntry>], mut visit: F) -> Result<()>
where
    F: FnMut(&[usize], Atom) -> Result<bool>,
{
    let d = ctx.d();
    let mut pos = vec![0usize; d];
    loop {
        if (0..d).any(|j| pos[j] >= tables[j].len()) {
            return Ok(());
        }
        let heads: Vec<Atom> = (0..d)
            .map(|j| Atom { j, p: tables[j][pos[j]].p, q: tables[j][pos[j]].q })
            .collect();
        let top = heads[ctx.argmax(&heads)?];
        if !visit(&pos, top)? {
            return Ok(());
        }
        for j in 0..d {
            if ctx.cmp_atoms(heads[j], top)? == Ordering::Equal {
                pos[j] += 1;
            }
        }
    }
}

fn fl(v: f64) -> i64 {
    let v = (v - 2.0 - v.abs() * 1e-14).floor();
    v.clamp(i64::MIN as f64, i64::MAX as f64) as i64
}

fn ce(v: f64) -> i64 {
    let v = (v + 2.0 + v.abs() * 1e-14).ceil();
    v.clamp(i64::MIN as f64, i64::MAX as f64) as i64
}

/// Candidates of one coordinate with error <= E*, grouped by numerator in
/// increasing order.
struct Stream {
    j: usize,
    sign: i64,
    y_lo: f64,
    y_hi: f64,
    e_hi: f64,
    c: u64,
    b: u64,
    cur: i64,
    end: i64,
    done: bool,
}

impl Stream {
    fn new(ctx: &Ctx, j: usize, e_hi: f64, c: u64, b: u64) -> Result<Stream> {
        let sign = ctx.cs[j].t.signum()? as i64;
        let ap = ctx.cs[j].ap;
        let y_mid = ap.mid.abs();
        let y_lo = (y_mid - ap.rad).max(0.0);
        let y_hi = y_mid + ap.rad;
        let (cf, bf) = (c as f64, b as f64);
        let mut start = fl(cf * y_lo);
        if y_lo - e_hi > 0.0 {
            start = start.max(fl(cf * (y_lo - e_hi)));
        }
        let start = start.max(0);
        let end = ce(bf * (y_hi + e_hi)).min(ce(bf * y_hi)).max(start);
        let (cur, end) = if sign >= 0 { (start, end) } else { (end, start) };
        Ok(Stream { j, sign: if sign == 0 { 1 } else { sign }, y_lo, y_hi, e_hi, c, b, cur, end, done: false })
    }

    fn next(&mut self, ctx: &Ctx, estar: Atom, work: &mut u64) -> Result<Option<(i64, Vec<u64>)>> {
        while !self.done {
            let py = self.cur;
            if self.cur == self.end {
                self.done = true;
            } else if self.sign > 0 {
                self.cur += 1;
            } else {
                self.cur -= 1;
            }
            let p = self.sign * py;
            let (q_lo, q_hi) = if py == 0 {
                (1, 1)
            } else {
                let pf = py as f64;
                let mut lo = fl((pf - 1.0) / self.y_hi).max(fl(pf / (self.y_hi + self.e_hi)));
                let mut hi = self.b as i64;
                if self.y_lo > 0.0 {
                    hi = hi.min(ce((pf + 1.0) / self.y_lo));
                }
                if self.y_lo - self.e_hi > 0.0 {
                    hi = hi.min(ce(pf / (self.y_lo - self.e_hi)));
                }
                lo = lo.max(1);
                (lo as u64, hi.max(0) as u64)
            };
            let q_lo = q_lo.max(self.c);
            let q_hi = q_hi.min(self.b);
            let mut qs = Vec::new();
            let mut q = q_lo;
            while q <= q_hi {
                *work += 1;
                if *work > ctx.enum_cap {
                    return Err(Error::CapExceeded(format!(
                        "tie-break search exceeded {} candidate checks",
                        ctx.enum_cap
                    )));
                }
                let a = Atom { j: self.j, p, q };
                if p.unsigned_abs().gcd(&q) == 1
                    && ctx.is_nearest(self.j, p, q)?
                    && ctx.cmp_atoms(a, estar)? != Ordering::Greater
                {
                    qs.push(q);
                }
                q += 1;
            }
            if !qs.is_empty() {
                return Ok(Some((p, qs)));
            }
        }
        Ok(None)
    }
}

struct Canon<'c, 'a> {
    ctx: &'c Ctx<'a>,
    m: u64,
    estar: Atom,
    e_hi: f64,
    c: Vec<u64>,
    b: Vec<u64>,
    work: u64,
}

impl Canon<'_, '_> {
    fn dfs(&mut self, chosen: &mut Vec<(i64, u64)>) -> Result<Option<Vec<(i64, u64)>>> {
        let d = self.ctx.d();
        let level = chosen.len();
        if level == d {
            return Ok(Some(chosen.clone()));
        }
        let monotone = self.ctx.kind.is_monotone();
        let mut stream = Stream::new(self.ctx, level, self.e_hi, self.c[level], self.b[level])?;
        while let Some((p, qs)) = stream.next(self.ctx, self.estar, &mut self.work)? {
            let mut best: Option<Vec<(i64, u64)>> = None;
            for q in qs {
                let mut qv: Vec<u64> = chosen.iter().map(|x| x.1).collect();
                qv.push(q);
                if monotone {
                    qv.extend_from_slice(&self.c[level + 1..]);
                }
                if self.ctx.kind.theta_u64(&qv) > self.m as u128 {
                    continue;
                }
                chosen.push((p, q));
                let r = self.dfs(chosen)?;
                chosen.pop();
                if let Some(r) = r {
                    if monotone {
                        return Ok(Some(r));
                    }
                    if best.as_ref().is_none_or(|b| lex_key(&r) < lex_key(b)) {
                        best = Some(r);
                    }
                }
            }
            if best.is_some() {
                return Ok(best);
            }
        }
        Ok(None)
    }
}

/// Lexicographically smallest point with every coordinate error <= E*,
/// nearest numerators, q_j in [c_j, b_j] and Θ(q) <= m.
pub(crate) fn canonical_point(ctx: &Ctx, m: u64, estar: Atom, c: &[u64]) -> Result<Vec<(i64, u64)>> {
    let d = ctx.d();
    let b: Vec<u64> = (0..d)
        .map(|j| match ctx.kind {
            HeightKind::Prod | HeightKind::ProdRoot => {
                let rest: u128 = (0..d).filter(|&k| k != j).map(|k| c[k] as u128).product();
                (m as u128 / rest.max(1)) as u64
            }
            _ => m,
        })
        .collect();
    let e_hi = ctx.disc_f(estar).1 * (1.0 + 1e-12) + 1e-300;
    let mut canon = Canon { ctx, m, estar, e_hi, c: c.to_vec(), b, work: 0 };
    canon
        .dfs(&mut Vec::with_capacity(d))?
        .ok_or_else(|| Error::Domain("tie-break search found no point at the optimal error".into()))
}

/// Per-denominator optimum for the lcm height: max_j dist(x_j, Z/Q).
pub(crate) fn lcm_atom(ctx: &Ctx, qq: u64) -> Result<Atom> {
    let mut atoms = Vec::with_capacity(ctx.d());
    for j in 0..ctx.d() {
        let f = ctx.floor_qx(j, qq)?;
        let a = Atom { j, p: f, q: qq };
        let b = Atom { j, p: f + 1, q: qq };
        atoms.push(if ctx.cmp_atoms(b, a)? == Ordering::Less { b } else { a });
    }
    Ok(atoms[ctx.argmax(&atoms)?])
}

/// First table position with error <= E.
pub(crate) fn first_within(ctx: &Ctx, table: &[BestEntry], j: usize, e: Atom) -> Result<usize> {
    for (i, t) in table.iter().enumerate() {
        if ctx.cmp_atoms(Atom { j, p: t.p, q: t.q }, e)? != Ordering::Greater {
            return Ok(i);
        }
    }
    Err(Error::Domain("best-approximation table does not reach the optimal error".into()))
}

pub(crate) fn best_pq(ctx: &Ctx, m: u64) -> Result<Vec<(i64, u64)>> {
    let d = ctx.d();
    let tables: Vec<Vec<BestEntry>> = (0..d).map(|j| build_table(ctx, j, m)).collect::<Result<_>>()?;
    if ctx.kind.is_monotone() {
        let mut best: Option<(Vec<u64>, Atom)> = None;
        sweep(ctx, &tables, |pos, e| {
            let qs: Vec<u64> = (0..d).map(|j| tables[j][pos[j]].q).collect();
            if ctx.kind.theta_u64(&qs) > m as u128 {
                return Ok(false);
            }
            best = Some((qs, e));
            Ok(true)
        })?;
        let (c, estar) = best.expect("q = 1 point is always admissible");
        canonical_point(ctx, m, estar, &c)
    } else {
        if m > ctx.enum_cap {
            return Err(Error::CapExceeded(format!(
                "lcm scan over {m} common denominators exceeds the enumeration cap {}",
                ctx.enum_cap
            )));
        }
        let mut estar = lcm_atom(ctx, 1)?;
        let mut e_hi = ctx.disc_f(estar).1;
        for qq in 2..=m {
            let a = lcm_atom(ctx, qq)?;
            if ctx.disc_f(a).0 > e_hi {
                continue;
            }
            if ctx.cmp_atoms(a, estar)? == Ordering::Less {
                estar = a;
                e_hi = ctx.disc_f(a).1;
            }
        }
        let c: Vec<u64> = (0..d)
            .map(|j| first_within(ctx, &tables[j], j, estar).map(|i| tables[j][i].q))
            .collect::<Result<_>>()?;
        canonical_point(ctx, m, estar, &c)
    }
}

/// Best approximation under the height bound via continued-fraction tables.
/// Agrees with brute_force_best, including the tie-break.
pub fn fast_best(x: &[RealTarget], kind: HeightKind, bound: &HeightValue) -> Result<ApproxRecord> {
    fast_best_capped(x, kind, bound, DEFAULT_ENUM_CAP)
}

pub fn fast_best_capped(
    x: &[RealTarget],
    kind: HeightKind,
    bound: &HeightValue,
    enum_cap: u64,
) -> Result<ApproxRecord> {
    if kind == HeightKind::Min {
        return Err(unbounded(kind));
    }
    let ctx = Ctx::new(x, kind, enum_cap)?;
    let m = theta_cap(kind, bound, ctx.d())?;
    let pq = best_pq(&ctx, m)?;
    ctx.record(&pq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::parse_targets;

    fn xs(v: &[&str]) -> Vec<RealTarget> {
        parse_targets(&v.iter().map(|s| s.to_string()).collect::<Vec<_>>(), 4096).unwrap()
    }

    #[test]
    fn exact_rational_pair() {
        let x = xs(&["dec:2/7", "dec:3/7"]);
        let b = HeightValue::integer(7);
        let r = brute_force_best(&x, HeightKind::Max, &b).unwrap();
        assert_eq!(r.point.to_string(), "(2/7, 3/7)");
        assert!(r.error.is_point());
        let f = fast_best(&x, HeightKind::Max, &b).unwrap();
        assert_eq!(f.point, r.point);
    }

    #[test]
    fn golden_d1() {
        let x = xs(&["golden"]);
        let r = fast_best(&x, HeightKind::Max, &HeightValue::integer(100)).unwrap();
        assert_eq!(r.point.to_string(), "(55/89)");
    }

    #[test]
    fn min_is_unbounded() {
        let x = xs(&["golden", "sqrt2"]);
        let b = HeightValue::integer(10);
        assert!(matches!(fast_best(&x, HeightKind::Min, &b), Err(Error::UnboundedSearch(_))));
        assert!(matches!(brute_force_best(&x, HeightKind::Min, &b), Err(Error::UnboundedSearch(_))));
    }

    #[test]
    fn brute_cap() {
        let x = xs(&["golden", "sqrt2", "e"]);
        let b = HeightValue::integer(1000);
        assert!(matches!(brute_force_best(&x, HeightKind::Max, &b), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn fast_matches_brute_small() {
        let x = xs(&["golden", "sqrt2"]);
        for kind in [HeightKind::Max, HeightKind::Prod, HeightKind::ProdRoot, HeightKind::Lcm] {
            for b in [1u64, 2, 5, 13, 30, 61] {
                let bound = HeightValue::integer(b);
                let r = brute_force_best(&x, kind, &bound).unwrap();
                let f = fast_best(&x, kind, &bound).unwrap();
                assert_eq!(r.point, f.point, "{kind} {b}");
                assert_eq!(r.error, f.error);
            }
        }
    }
}
