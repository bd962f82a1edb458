use std::cmp::Ordering;

use super::best::{canonical_point, first_within, lcm_atom, sweep};
use super::table::{build_table, BestEntry};
use super::{theta_cap, ApproxRecord, Atom, Ctx, DEFAULT_ENUM_CAP};
use crate::error::{Error, Result};
use crate::heights::{HeightKind, HeightValue};
use crate::numerics::RealTarget;

/// Record chain: points whose error strictly beats every point of smaller or
/// equal height, in increasing height, up to the height cap.
pub fn records(x: &[RealTarget], kind: HeightKind, cap: &HeightValue) -> Result<Vec<ApproxRecord>> {
    records_capped(x, kind, cap, DEFAULT_ENUM_CAP)
}

pub fn records_capped(
    x: &[RealTarget],
    kind: HeightKind,
    cap: &HeightValue,
    enum_cap: u64,
) -> Result<Vec<ApproxRecord>> {
    if kind == HeightKind::Min {
        return Err(Error::UnboundedSearch(
            "records under the min height are not defined: one coordinate's denominator is free".into(),
        ));
    }
    if let Some(t) = x.iter().find(|t| t.is_exact()) {
        return Err(Error::Domain(format!("rational coordinate {t}: record chain is finite")));
    }
    let ctx = Ctx::new(x, kind, enum_cap)?;
    let d = ctx.d();
    let m = theta_cap(kind, cap, d)?;
    let tables: Vec<Vec<BestEntry>> = (0..d).map(|j| build_table(&ctx, j, m)).collect::<Result<_>>()?;
    // (Θ, E*, c)
    let mut chain: Vec<(u64, Atom, Vec<u64>)> = Vec::new();
    if kind.is_monotone() {
        sweep(&ctx, &tables, |pos, e| {
            let qs: Vec<u64> = (0..d).map(|j| tables[j][pos[j]].q).collect();
            let h = kind.theta_u64(&qs);
            if h > m as u128 {
                return Ok(false);
            }
            let h = h as u64;
            match chain.last_mut() {
                Some(last) if last.0 == h => *last = (h, e, qs),
                _ => chain.push((h, e, qs)),
            }
            Ok(true)
        })?;
    } else {
        if m > enum_cap {
            return Err(Error::CapExceeded(format!(
                "lcm scan over {m} common denominators exceeds the enumeration cap {enum_cap}"
            )));
        }
        let mut best: Option<(Atom, f64)> = None;
        for qq in 1..=m {
            let a = lcm_atom(&ctx, qq)?;
            let better = match best {
                None => true,
                Some((_, hi)) if ctx.disc_f(a).0 > hi => false,
                Some((b, _)) => ctx.cmp_atoms(a, b)? == Ordering::Less,
            };
            if better {
                best = Some((a, ctx.disc_f(a).1));
                let c = (0..d)
                    .map(|j| first_within(&ctx, &tables[j], j, a).map(|i| tables[j][i].q))
                    .collect::<Result<Vec<_>>>()?;
                chain.push((qq, a, c));
            }
        }
    }
    chain
        .into_iter()
        .map(|(h, e, c)| {
            let pq = canonical_point(&ctx, h, e, &c)?;
            ctx.record(&pq)
        })
        .collect()
}
