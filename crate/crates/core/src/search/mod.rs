//! Best approximations under a height budget, record chains and solution
//! counts.

mod best;
mod count;
mod records;
mod table;

use std::cmp::Ordering;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

pub use best::{brute_force_best, brute_force_best_capped, fast_best, fast_best_capped};
pub use count::{solutions_count, solutions_count_with, SolutionCount, DEFAULT_SECONDARY_CAP_BITS};
pub use records::{records, records_capped};
pub use table::{best_approximations, BestEntry};

use crate::error::{Error, Result};
use crate::heights::{integer_cap, HeightKind, HeightValue};
use crate::numerics::{cmp_disc, Approx, Interval, RationalPoint, RealTarget};

/// Upper bound on enumerated tuples / scanned denominators.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// A point together with its certified error and height.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxRecord {
    pub point: RationalPoint,
    pub error: Interval,
    pub height: HeightValue,
}

impl ApproxRecord {
    pub fn error_f64(&self) -> f64 {
        self.error.mid_f64()
    }
}

/// Writes records as CSV: height, height_f64, error bounds, then the point.
pub fn write_records_csv<W: Write>(records: &[ApproxRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["height", "height_f64", "error_lo", "error_hi", "point"])?;
    for r in records {
        let e = r.error.to_f64();
        wr.write_record([
            r.height.to_bound_string(),
            format!("{:.6}", r.height.to_f64()),
            format!("{:e}", e.lo),
            format!("{:e}", e.hi),
            r.point.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// One coordinate of the target together with its cached approximation.
#[derive(Debug)]
pub(crate) struct Coord<'a> {
    pub t: &'a RealTarget,
    pub ap: Approx,
}

/// The error term |x_j - p/q| (p/q not necessarily reduced).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Atom {
    pub j: usize,
    pub p: i64,
    pub q: u64,
}

impl Atom {
    pub fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p), BigInt::from(self.q))
    }
}

pub(crate) struct Ctx<'a> {
    pub cs: Vec<Coord<'a>>,
    pub kind: HeightKind,
    pub enum_cap: u64,
}

impl<'a> Ctx<'a> {
    pub fn new(x: &'a [RealTarget], kind: HeightKind, enum_cap: u64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Domain("empty target vector".into()));
        }
        Ok(Ctx { cs: x.iter().map(|t| Coord { t, ap: t.approx() }).collect(), kind, enum_cap })
    }

    pub fn d(&self) -> usize {
        self.cs.len()
    }

    #[inline]
    pub fn disc_f(&self, a: Atom) -> (f64, f64) {
        self.cs[a.j].ap.disc(a.p, a.q as i64)
    }

    pub fn cmp_atoms(&self, a: Atom, b: Atom) -> Result<Ordering> {
        if a == b {
            return Ok(Ordering::Equal);
        }
        let (alo, ahi) = self.disc_f(a);
        let (blo, bhi) = self.disc_f(b);
        if ahi < blo {
            return Ok(Ordering::Less);
        }
        if alo > bhi {
            return Ok(Ordering::Greater);
        }
        cmp_disc(self.cs[a.j].t, &a.ratio(), self.cs[b.j].t, &b.ratio())
    }

    /// Index of a maximal atom.
    pub fn argmax(&self, atoms: &[Atom]) -> Result<usize> {
        let mut best = 0;
        for i in 1..atoms.len() {
            if self.cmp_atoms(atoms[i], atoms[best])? == Ordering::Greater {
                best = i;
            }
        }
        Ok(best)
    }

    /// Compares the sup-norm errors of two points.
    pub fn cmp_points(&self, a: &[Atom], b: &[Atom]) -> Result<Ordering> {
        let (mut alo, mut ahi, mut blo, mut bhi) = (0f64, 0f64, 0f64, 0f64);
        for &t in a {
            let (l, h) = self.disc_f(t);
            alo = alo.max(l);
            ahi = ahi.max(h);
        }
        for &t in b {
            let (l, h) = self.disc_f(t);
            blo = blo.max(l);
            bhi = bhi.max(h);
        }
        if ahi < blo {
            return Ok(Ordering::Less);
        }
        if alo > bhi {
            return Ok(Ordering::Greater);
        }
        let ma = a[self.argmax(a)?];
        let mb = b[self.argmax(b)?];
        self.cmp_atoms(ma, mb)
    }

    /// Certified floor(q * x_j).
    pub fn floor_qx(&self, j: usize, q: u64) -> Result<i64> {
        let c = &self.cs[j];
        let y = q as f64 * c.ap.mid;
        let margin = q as f64 * c.ap.rad + y.abs() * 4.0 * f64::EPSILON + 1e-300;
        let fy = y.floor();
        if y - fy > margin && fy + 1.0 - y > margin && fy.abs() < 4e18 {
            return Ok(fy as i64);
        }
        let qq = BigRational::from_integer(BigInt::from(q));
        if let Some(v) = c.t.exact_value() {
            return to_i64((v * &qq).floor().to_integer());
        }
        for bits in crate::numerics::schedule(c.t.budget_bits()) {
            let iv = c.t.refine(bits)?.mul_scalar(&qq);
            let (a, b) = (iv.lo().floor(), iv.hi().floor());
            if a == b && !iv.lo().is_integer() {
                return to_i64(a.to_integer());
            }
        }
        Err(Error::PrecisionExhausted(format!("floor({q} * {})", c.t)))
    }

    /// |x_j - p/q| < 1/q, i.e. p is floor(q x_j) or ceil(q x_j).
    pub fn is_nearest(&self, j: usize, p: i64, q: u64) -> Result<bool> {
        let (lo, hi) = self.cs[j].ap.disc(p, q as i64);
        let inv = 1.0 / q as f64;
        if hi < inv * (1.0 - 4.0 * f64::EPSILON) {
            return Ok(true);
        }
        if lo > inv * (1.0 + 4.0 * f64::EPSILON) {
            return Ok(false);
        }
        let t = BigRational::new(BigInt::from(1), BigInt::from(q));
        Ok(crate::numerics::cmp_disc_value(self.cs[j].t, &Atom { j, p, q }.ratio(), &t)? == Ordering::Less)
    }

    pub fn point(&self, pq: &[(i64, u64)]) -> RationalPoint {
        RationalPoint::new(
            pq.iter()
                .map(|&(p, q)| crate::numerics::ReducedRational::from_coprime(p, q))
                .collect(),
        )
    }

    pub fn record(&self, pq: &[(i64, u64)]) -> Result<ApproxRecord> {
        let point = self.point(pq);
        let xs: Vec<RealTarget> = self.cs.iter().map(|c| c.t.clone()).collect();
        let error = crate::numerics::point_error(&xs, &point)?;
        let height = crate::heights::height(&point, self.kind);
        Ok(ApproxRecord { point, error, height })
    }
}

pub(crate) fn to_i64(v: BigInt) -> Result<i64> {
    v.to_i64().ok_or_else(|| Error::Domain(format!("numerator {v} outside the 64-bit search range")))
}

/// Integer cap on Θ for the bound, as u64.
pub(crate) fn theta_cap(kind: HeightKind, bound: &HeightValue, d: usize) -> Result<u64> {
    let m = integer_cap(kind, bound, d);
    m.to_u64()
        .filter(|&m| m < (1u64 << 62))
        .ok_or_else(|| Error::CapExceeded(format!("height bound {bound} gives Θ cap {m} beyond 2^62")))
}
