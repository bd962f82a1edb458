//! Continued-fraction expansion with certified partial quotients.
//!
//! Convention: x = [a_1, a_2, ...] in [0, 1) with p_{-1} = 1, p_0 = 0,
//! q_{-1} = 0, q_0 = 1 and p_{n+1} = a_{n+1} p_n + p_{n-1}.

use std::cmp::Ordering;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{certified_disc, cmp_disc_value, Interval, RealTarget, ReducedRational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionStatus {
    /// The requested depth was reached.
    Complete,
    /// The target is rational and its expansion ended.
    Terminated,
    /// The precision budget ran out before the requested depth.
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergentEntry {
    pub n: usize,
    #[serde(serialize_with = "ser_display")]
    pub a: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub p: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub q: BigInt,
}

pub(crate) fn ser_display<T: std::fmt::Display, S: serde::Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergentTable {
    pub entries: Vec<ConvergentEntry>,
    pub status: ExpansionStatus,
}

impl ConvergentTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Partial quotient a_n, 1-indexed.
    pub fn a(&self, n: usize) -> Option<&BigInt> {
        n.checked_sub(1).and_then(|i| self.entries.get(i)).map(|e| &e.a)
    }

    /// (p_n, q_n) for n >= -1, including the seeds.
    pub fn pq(&self, n: isize) -> Option<(BigInt, BigInt)> {
        match n {
            -1 => Some((BigInt::one(), BigInt::zero())),
            0 => Some((BigInt::zero(), BigInt::one())),
            n if n > 0 => self.entries.get(n as usize - 1).map(|e| (e.p.clone(), e.q.clone())),
            _ => None,
        }
    }

    pub fn quotients(&self) -> Vec<BigInt> {
        self.entries.iter().map(|e| e.a.clone()).collect()
    }

    pub fn convergent(&self, n: usize) -> Option<ReducedRational> {
        let (p, q) = self.pq(n as isize)?;
        Some(ReducedRational::from_coprime(p, q))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "a", "p", "q"])?;
        for e in &self.entries {
            wr.write_record([e.n.to_string(), e.a.to_string(), e.p.to_string(), e.q.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Lazily produces certified partial quotients of a target in [0, 1).
#[derive(Debug)]
pub struct CfStream<'a> {
    target: &'a RealTarget,
    bits: u32,
    prev: (BigInt, BigInt),
    cur: (BigInt, BigInt),
    n: usize,
    done: bool,
}

impl<'a> CfStream<'a> {
    pub fn new(target: &'a RealTarget) -> Result<Self> {
        let f = target.floor()?;
        if !f.is_zero() {
            return Err(Error::Domain(format!("target {target} is not in [0, 1)")));
        }
        Ok(CfStream {
            target,
            bits: 64.min(target.budget_bits()),
            prev: (BigInt::one(), BigInt::zero()),
            cur: (BigInt::zero(), BigInt::one()),
            n: 0,
            done: false,
        })
    }

    /// Index of the last emitted quotient.
    pub fn depth(&self) -> usize {
        self.n
    }

    /// Current convergent (p_n, q_n).
    pub fn current(&self) -> &(BigInt, BigInt) {
        &self.cur
    }

    pub fn previous(&self) -> &(BigInt, BigInt) {
        &self.prev
    }

    /// Next partial quotient; None once a rational target is exhausted.
    pub fn next_quotient(&mut self) -> Result<Option<BigInt>> {
        if self.done {
            return Ok(None);
        }
        let a = match self.target.exact_value() {
            Some(x) => {
                let den = x * BigRational::from_integer(self.cur.1.clone())
                    - BigRational::from_integer(self.cur.0.clone());
                if den.is_zero() {
                    self.done = true;
                    return Ok(None);
                }
                let num = BigRational::from_integer(self.prev.0.clone())
                    - x * BigRational::from_integer(self.prev.1.clone());
                (num / den).floor().to_integer()
            }
            None => self.certified_quotient()?,
        };
        debug_assert!(a >= BigInt::one());
        let next = (&a * &self.cur.0 + &self.prev.0, &a * &self.cur.1 + &self.prev.1);
        self.prev = std::mem::replace(&mut self.cur, next);
        self.n += 1;
        Ok(Some(a))
    }

    fn complete_quotient(&self, v: &BigRational) -> Option<BigRational> {
        let den = v * BigRational::from_integer(self.cur.1.clone())
            - BigRational::from_integer(self.cur.0.clone());
        if den.is_zero() {
            return None;
        }
        let num = BigRational::from_integer(self.prev.0.clone())
            - v * BigRational::from_integer(self.prev.1.clone());
        Some(num / den)
    }

    fn certified_quotient(&mut self) -> Result<BigInt> {
        loop {
            let iv = self.target.refine(self.bits)?;
            let pole = BigRational::new(self.cur.0.clone(), self.cur.1.clone());
            let pole_inside = iv.contains(&pole);
            if !pole_inside {
                if let (Some(a), Some(b)) =
                    (self.complete_quotient(iv.lo()), self.complete_quotient(iv.hi()))
                {
                    let (fa, fb) = (a.floor(), b.floor());
                    if fa == fb && fa.is_positive() {
                        return Ok(fa.to_integer());
                    }
                }
            }
            if self.bits >= self.target.budget_bits() {
                return Err(Error::PrecisionExhausted(format!(
                    "partial quotient a_{} of {} not certified within {} bits",
                    self.n + 1,
                    self.target,
                    self.target.budget_bits()
                )));
            }
            self.bits = (self.bits * 2).min(self.target.budget_bits());
        }
    }
}

/// Expands the first n partial quotients, stopping early at termination or
/// when the precision budget binds.
pub fn expand(target: &RealTarget, n: usize) -> Result<ConvergentTable> {
    let mut stream = CfStream::new(target)?;
    let mut entries = Vec::with_capacity(n);
    let mut status = ExpansionStatus::Complete;
    while entries.len() < n {
        match stream.next_quotient() {
            Ok(Some(a)) => {
                let (p, q) = stream.current().clone();
                entries.push(ConvergentEntry { n: entries.len() + 1, a, p, q });
            }
            Ok(None) => {
                status = ExpansionStatus::Terminated;
                break;
            }
            Err(Error::PrecisionExhausted(msg)) => {
                if entries.is_empty() {
                    return Err(Error::PrecisionExhausted(msg));
                }
                status = ExpansionStatus::BudgetExhausted;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if status == ExpansionStatus::Complete && target.is_exact() && stream.next_quotient()?.is_none() {
        status = ExpansionStatus::Terminated;
    }
    Ok(ConvergentTable { entries, status })
}

/// Outcome of checking the convergent gap inequalities at index n.
#[derive(Clone, Debug)]
pub struct GapCertificate {
    pub n: usize,
    pub error: Interval,
    /// 1/(3 a_{n+1} q_n^2) < |x - p_n/q_n|
    pub lower_holds: bool,
    /// 1/(2 q_n q_{n+1}) <= |x - p_n/q_n| <= 1/(q_n q_{n+1})
    pub two_sided_holds: bool,
}

impl GapCertificate {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.two_sided_holds
    }
}

pub fn gap_inequality_check(table: &ConvergentTable, target: &RealTarget, n: usize) -> Result<GapCertificate> {
    if n == 0 || n + 1 > table.len() {
        return Err(Error::Domain(format!(
            "gap check needs 1 <= n < table length ({}), got n = {n}",
            table.len()
        )));
    }
    let (p, q) = table.pq(n as isize).unwrap();
    let (_, q1) = table.pq(n as isize + 1).unwrap();
    let a1 = table.a(n + 1).unwrap().clone();
    let r = BigRational::new(p, q.clone());
    let one = BigInt::one();
    let paper_lower = BigRational::new(one.clone(), BigInt::from(3) * &a1 * &q * &q);
    let lower2 = BigRational::new(one.clone(), BigInt::from(2) * &q * &q1);
    let upper = BigRational::new(one, &q * &q1);
    let lower_holds = cmp_disc_value(target, &r, &paper_lower)? == Ordering::Greater;
    let two_sided_holds = cmp_disc_value(target, &r, &lower2)? != Ordering::Less
        && cmp_disc_value(target, &r, &upper)? != Ordering::Greater;
    Ok(GapCertificate { n, error: certified_disc(target, &r)?, lower_holds, two_sided_holds })
}

/// Semiconvergents (p_{n-1} + k p_n)/(q_{n-1} + k q_n) for 1 <= k < a_{n+1}.
pub fn semiconvergents(table: &ConvergentTable, n: usize) -> Result<Vec<ReducedRational>> {
    let a = table.a(n + 1).ok_or_else(|| {
        Error::Domain(format!("a_{} is not in the table (length {})", n + 1, table.len()))
    })?;
    let (p0, q0) = table.pq(n as isize - 1).unwrap();
    let (p1, q1) = table.pq(n as isize).unwrap();
    let mut out = Vec::new();
    let mut k = BigInt::one();
    while &k < a {
        out.push(ReducedRational::from_coprime(&p0 + &k * &p1, &q0 + &k * &q1));
        k += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quotients(s: &str, n: usize) -> Vec<i64> {
        let t: RealTarget = s.parse().unwrap();
        expand(&t, n)
            .unwrap()
            .quotients()
            .iter()
            .map(|a| i64::try_from(a).unwrap())
            .collect()
    }

    #[test]
    fn fixture_expansions() {
        assert_eq!(quotients("golden", 10), vec![1; 10]);
        assert_eq!(quotients("sqrt2", 10), vec![2; 10]);
        assert_eq!(quotients("e", 11), vec![1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8]);
    }

    #[test]
    fn rational_terminates() {
        let t: RealTarget = "dec:0.49".parse().unwrap();
        let tab = expand(&t, 10).unwrap();
        assert_eq!(tab.status, ExpansionStatus::Terminated);
        assert_eq!(tab.quotients(), vec![BigInt::from(2), BigInt::from(24), BigInt::from(2)]);
        let t: RealTarget = "dec:0".parse().unwrap();
        assert!(expand(&t, 3).unwrap().is_empty());
        let t: RealTarget = "dec:1.5".parse().unwrap();
        assert!(matches!(expand(&t, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn exact_depth_is_complete() {
        let t: RealTarget = "dec:0.5".parse().unwrap();
        assert_eq!(expand(&t, 1).unwrap().status, ExpansionStatus::Terminated);
        let t: RealTarget = "dec:0.49".parse().unwrap();
        assert_eq!(expand(&t, 2).unwrap().status, ExpansionStatus::Complete);
    }

    #[test]
    fn budget_binds() {
        let t = RealTarget::parse_with_budget("golden", 64).unwrap();
        let tab = expand(&t, 200).unwrap();
        assert_eq!(tab.status, ExpansionStatus::BudgetExhausted);
        assert!(tab.len() > 20 && tab.len() < 200);
    }

    #[test]
    fn semiconvergent_examples() {
        let t: RealTarget = "sqrt2".parse().unwrap();
        let tab = expand(&t, 4).unwrap();
        let s = semiconvergents(&tab, 1).unwrap();
        assert_eq!(s.iter().map(|r| r.to_string()).collect::<Vec<_>>(), vec!["1/3"]);
        let t: RealTarget = "e".parse().unwrap();
        let tab = expand(&t, 6).unwrap();
        let s = semiconvergents(&tab, 4).unwrap();
        assert_eq!(
            s.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            vec!["8/11", "13/18", "18/25"]
        );
        assert!(semiconvergents(&tab, 6).is_err());
    }

    #[test]
    fn csv_has_header() {
        let t: RealTarget = "golden".parse().unwrap();
        let mut buf = Vec::new();
        expand(&t, 3).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,a,p,q\n1,1,1,1\n2,1,1,2\n3,1,2,3\n");
    }
}
