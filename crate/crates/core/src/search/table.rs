use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::{to_i64, Atom, Ctx};
use crate::cf::CfStream;
use crate::error::Result;
use crate::numerics::RealTarget;

/// A best approximation of the first kind p/q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct BestEntry {
    pub p: i64,
    pub q: u64,
}

/// Best approximations of the first kind of x_j with q <= bound, in
/// increasing q and strictly decreasing error.
pub(crate) fn build_table(ctx: &Ctx, j: usize, bound: u64) -> Result<Vec<BestEntry>> {
    let t = ctx.cs[j].t;
    let (m, frac) = t.fractional_part()?;
    let shift = to_i64(m)?;
    let mut kept: Vec<BestEntry> = Vec::new();
    let offer = |kept: &mut Vec<BestEntry>, p: &BigInt, q: u64| -> Result<()> {
        let p = to_i64(p.clone())?
            .checked_add(shift.checked_mul(q as i64).unwrap_or(i64::MAX))
            .unwrap_or(i64::MAX);
        let cand = BestEntry { p, q };
        match kept.last().copied() {
            None => kept.push(cand),
            Some(last) => {
                let o = ctx.cmp_atoms(Atom { j, p, q }, Atom { j, p: last.p, q: last.q })?;
                if o == Ordering::Less {
                    if last.q == q {
                        kept.pop();
                    }
                    kept.push(cand);
                }
            }
        }
        Ok(())
    };
    offer(&mut kept, &BigInt::zero(), 1)?;
    if frac.exact_value().is_some_and(|v| v.is_zero()) {
        return Ok(kept);
    }
    let mut stream = CfStream::new(&frac)?;
    let bound_big = BigInt::from(bound);
    loop {
        let (pp, qp) = stream.previous().clone();
        let (pc, qc) = stream.current().clone();
        let a = match stream.next_quotient()? {
            Some(a) => a,
            None => break,
        };
        let half: BigInt = &a / 2;
        let kstart = if half.is_zero() { BigInt::one() } else { half };
        if &qp + &kstart * &qc > bound_big {
            break;
        }
        let kmax = ((&bound_big - &qp) / &qc).min(a.clone());
        let (ks, ke) = (kstart.to_u64().unwrap(), kmax.to_u64().unwrap());
        for k in ks..=ke {
            let kk = BigInt::from(k);
            let q = (&qp + &kk * &qc).to_u64().unwrap();
            offer(&mut kept, &(&pp + &kk * &pc), q)?;
        }
        if kmax < a {
            break;
        }
    }
    Ok(kept)
}

/// Best approximations of the first kind of a single target with q <= bound.
pub fn best_approximations(x: &RealTarget, bound: u64) -> Result<Vec<BestEntry>> {
    let xs = std::slice::from_ref(x);
    let ctx = Ctx::new(xs, crate::heights::HeightKind::Max, super::DEFAULT_ENUM_CAP)?;
    build_table(&ctx, 0, bound)
}
