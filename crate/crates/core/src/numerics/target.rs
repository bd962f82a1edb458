use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::interval::{Interval, ratio_to_f64_down, ratio_to_f64_up};
use super::rational::parse_exact;
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION_BITS: u32 = 4096;

/// Bits used for the cached f64 approximation.
const APPROX_BITS: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadraticFixture {
    /// (sqrt(5) - 1) / 2 = [1, 1, 1, ...]
    Golden,
    /// sqrt(2) - 1 = [2, 2, 2, ...]
    Sqrt2,
}

impl QuadraticFixture {
    /// Coefficients (a, b, c) of the minimal polynomial a x^2 + b x + c.
    pub fn minimal_polynomial(self) -> (i64, i64, i64) {
        match self {
            QuadraticFixture::Golden => (1, 1, -1),
            QuadraticFixture::Sqrt2 => (1, 2, -1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CfPattern {
    /// e - 2 = [1, 2, 1, 1, 4, 1, 1, 6, ...]
    EulerFrac,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TargetSpec {
    Decimal(BigRational),
    Quadratic(QuadraticFixture),
    CfStream(CfPattern),
    Uniform { seed: u64, coord: u32 },
    /// sum over n >= 1 of 10^(-n!)
    Liouville,
}

impl TargetSpec {
    /// Partial quotient a_n (n >= 1) for continued-fraction backed fixtures.
    pub fn pattern_quotient(&self, n: usize) -> Option<u64> {
        assert!(n >= 1);
        match self {
            TargetSpec::Quadratic(QuadraticFixture::Golden) => Some(1),
            TargetSpec::Quadratic(QuadraticFixture::Sqrt2) => Some(2),
            TargetSpec::CfStream(CfPattern::EulerFrac) => {
                Some(if n % 3 == 2 { 2 * (n as u64 + 1) / 3 } else { 1 })
            }
            _ => None,
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::Decimal(r) => {
                if r.is_integer() {
                    write!(f, "dec:{}", r.numer())
                } else {
                    write!(f, "dec:{}/{}", r.numer(), r.denom())
                }
            }
            TargetSpec::Quadratic(QuadraticFixture::Golden) => write!(f, "golden"),
            TargetSpec::Quadratic(QuadraticFixture::Sqrt2) => write!(f, "sqrt2"),
            TargetSpec::CfStream(CfPattern::EulerFrac) => write!(f, "e"),
            TargetSpec::Uniform { seed, coord: 0 } => write!(f, "seed:{seed}"),
            TargetSpec::Uniform { seed, coord } => write!(f, "seed:{seed}:{coord}"),
            TargetSpec::Liouville => write!(f, "liouville"),
        }
    }
}

impl FromStr for TargetSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "golden" => TargetSpec::Quadratic(QuadraticFixture::Golden),
            "sqrt2" => TargetSpec::Quadratic(QuadraticFixture::Sqrt2),
            "e" => TargetSpec::CfStream(CfPattern::EulerFrac),
            "liouville" => TargetSpec::Liouville,
            _ => {
                if let Some(lit) = s.strip_prefix("dec:") {
                    TargetSpec::Decimal(parse_exact(lit)?)
                } else if let Some(rest) = s.strip_prefix("seed:") {
                    let bad = || Error::Parse(format!("bad seed fixture {s:?}"));
                    let (seed, coord) = match rest.split_once(':') {
                        Some((a, b)) => (a, b.parse::<u32>().map_err(|_| bad())?),
                        None => (rest, 0),
                    };
                    TargetSpec::Uniform { seed: seed.parse().map_err(|_| bad())?, coord }
                } else {
                    return Err(Error::Parse(format!(
                        "unknown target {s:?} (expected golden, sqrt2, e, liouville, dec:<x>, seed:<n>)"
                    )));
                }
            }
        })
    }
}

/// f64 approximation with a rigorous radius: |x - mid| <= rad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approx {
    pub mid: f64,
    pub rad: f64,
}

impl Approx {
    /// Rigorous f64 enclosure [lo, hi] of |x - p/q|.
    #[inline]
    pub fn disc(&self, p: i64, q: i64) -> (f64, f64) {
        let r = p as f64 / q as f64;
        self.disc_f(r)
    }

    /// Same for a value r_f within 3 * 2^-53 relative of the rational.
    #[inline]
    pub fn disc_f(&self, r: f64) -> (f64, f64) {
        let d = (self.mid - r).abs();
        let delta = self.rad + (self.mid.abs() + r.abs()) * (2.0 * f64::EPSILON) + 1e-300;
        ((d - delta).max(0.0), d + delta)
    }
}

#[derive(Clone, Debug, Default)]
struct Cache {
    /// (p_n, q_n) for n = 0, 1, 2, ...; entry 0 is (0, 1).
    convergents: Vec<(BigInt, BigInt)>,
    words: Vec<u64>,
    rng: Option<ChaCha8Rng>,
    approx: Option<Approx>,
}

/// A real number given by a certified refinement oracle.
///
/// refine(b) is a pure function of (spec, b): repeated calls return the same
/// interval and larger b gives nested intervals. Refinement past the budget
/// fails with PrecisionExhausted.
#[derive(Clone, Debug)]
pub struct RealTarget {
    spec: TargetSpec,
    budget_bits: u32,
    cache: RefCell<Cache>,
}

impl PartialEq for RealTarget {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl fmt::Display for RealTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

impl FromStr for RealTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(RealTarget::new(s.parse()?))
    }
}

fn ten_pow(n: usize) -> BigInt {
    num_traits::pow(BigInt::from(10), n)
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

impl RealTarget {
    pub fn new(spec: TargetSpec) -> Self {
        RealTarget::with_budget(spec, DEFAULT_PRECISION_BITS)
    }

    pub fn with_budget(spec: TargetSpec, budget_bits: u32) -> Self {
        RealTarget { spec, budget_bits, cache: RefCell::new(Cache::default()) }
    }

    pub fn parse_with_budget(s: &str, budget_bits: u32) -> Result<Self> {
        Ok(RealTarget::with_budget(s.parse()?, budget_bits))
    }

    pub fn rational(r: BigRational) -> Self {
        RealTarget::new(TargetSpec::Decimal(r))
    }

    pub fn spec(&self) -> &TargetSpec {
        &self.spec
    }

    pub fn budget_bits(&self) -> u32 {
        self.budget_bits
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.spec, TargetSpec::Decimal(_))
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        match &self.spec {
            TargetSpec::Decimal(r) => Some(r),
            _ => None,
        }
    }

    /// Interval of width <= 2^-bits containing the target.
    pub fn refine(&self, bits: u32) -> Result<Interval> {
        if bits > self.budget_bits {
            return Err(Error::PrecisionExhausted(format!(
                "{}: {bits} bits requested, budget {}",
                self.spec, self.budget_bits
            )));
        }
        Ok(match &self.spec {
            TargetSpec::Decimal(r) => Interval::point(r.clone()),
            TargetSpec::Quadratic(_) | TargetSpec::CfStream(_) => self.refine_cf(bits),
            TargetSpec::Uniform { .. } => self.refine_uniform(bits),
            TargetSpec::Liouville => refine_liouville(bits),
        })
    }

    /// Refinement at the full budget.
    pub fn finest(&self) -> Result<Interval> {
        self.refine(self.budget_bits)
    }

    fn refine_cf(&self, bits: u32) -> Interval {
        let mut cache = self.cache.borrow_mut();
        let conv = &mut cache.convergents;
        if conv.is_empty() {
            conv.push((BigInt::zero(), BigInt::one()));
        }
        let need = bits as u64;
        let mut n = 0;
        loop {
            if n + 1 >= conv.len() {
                let len = conv.len();
                let a = BigInt::from(self.spec.pattern_quotient(len).expect("cf fixture"));
                let (pp, qp) = if len >= 2 {
                    conv[len - 2].clone()
                } else {
                    (BigInt::one(), BigInt::zero())
                };
                let (p, q) = &conv[len - 1];
                let next = (&a * p + pp, &a * q + qp);
                conv.push(next);
            }
            let prod = &conv[n].1 * &conv[n + 1].1;
            if prod.bits() > need {
                let a = BigRational::new(conv[n].0.clone(), conv[n].1.clone());
                let b = BigRational::new(conv[n + 1].0.clone(), conv[n + 1].1.clone());
                return if a < b { Interval::new(a, b) } else { Interval::new(b, a) };
            }
            n += 1;
        }
    }

    fn refine_uniform(&self, bits: u32) -> Interval {
        let TargetSpec::Uniform { seed, coord } = self.spec else { unreachable!() };
        let mut cache = self.cache.borrow_mut();
        let words_needed = (bits as usize).div_ceil(64).max(1);
        if cache.rng.is_none() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(coord as u64);
            cache.rng = Some(rng);
        }
        while cache.words.len() < words_needed {
            let w = cache.rng.as_mut().unwrap().next_u64();
            cache.words.push(w);
        }
        let mut m = BigInt::zero();
        for w in &cache.words[..words_needed] {
            m = (m << 64) + BigInt::from(*w);
        }
        let drop = words_needed * 64 - bits as usize;
        let m = m >> drop;
        let den = BigInt::one() << bits as usize;
        Interval::new(
            BigRational::new(m.clone(), den.clone()),
            BigRational::new(m + 1, den),
        )
    }

    /// Cached f64 approximation with rigorous radius.
    pub fn approx(&self) -> Approx {
        if let Some(a) = self.cache.borrow().approx {
            return a;
        }
        let iv = self
            .refine(APPROX_BITS.min(self.budget_bits))
            .expect("approximation within budget");
        let lo = ratio_to_f64_down(iv.lo());
        let hi = ratio_to_f64_up(iv.hi());
        let mid = iv.mid_f64();
        let rad = ((mid - lo).max(hi - mid) * (1.0 + 4.0 * f64::EPSILON)).next_up();
        let a = Approx { mid, rad };
        self.cache.borrow_mut().approx = Some(a);
        a
    }

    /// Certified floor of the target.
    pub fn floor(&self) -> Result<BigInt> {
        if let Some(r) = self.exact_value() {
            return Ok(r.floor().to_integer());
        }
        let mut bits = 64.min(self.budget_bits);
        loop {
            let iv = self.refine(bits)?;
            let a = iv.lo().floor().to_integer();
            let b = iv.hi().floor().to_integer();
            if a == b && !iv.lo().is_integer() {
                return Ok(a);
            }
            if a == b && iv.is_point() {
                return Ok(a);
            }
            if bits == self.budget_bits {
                return Err(Error::PrecisionExhausted(format!("floor of {}", self.spec)));
            }
            bits = (bits * 2).min(self.budget_bits);
        }
    }

    /// Certified sign: -1, 0 (exact zero only) or 1.
    pub fn signum(&self) -> Result<i32> {
        if let Some(r) = self.exact_value() {
            return Ok(if r.is_zero() { 0 } else if r > &BigRational::zero() { 1 } else { -1 });
        }
        let mut bits = 64.min(self.budget_bits);
        loop {
            let iv = self.refine(bits)?;
            if iv.lo() > &BigRational::zero() {
                return Ok(1);
            }
            if iv.hi() < &BigRational::zero() {
                return Ok(-1);
            }
            if bits == self.budget_bits {
                return Err(Error::PrecisionExhausted(format!("sign of {}", self.spec)));
            }
            bits = (bits * 2).min(self.budget_bits);
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.approx().mid
    }

    /// The same target with the fractional part only, x - floor(x).
    pub fn fractional_part(&self) -> Result<(BigInt, RealTarget)> {
        let m = self.floor()?;
        if m.is_zero() {
            return Ok((m, self.clone()));
        }
        match &self.spec {
            TargetSpec::Decimal(r) => Ok((
                m.clone(),
                RealTarget::with_budget(
                    TargetSpec::Decimal(r - BigRational::from_integer(m)),
                    self.budget_bits,
                ),
            )),
            _ => Err(Error::Domain(format!("{} is outside [0, 1)", self.spec))),
        }
    }
}

fn refine_liouville(bits: u32) -> Interval {
    // [S_{n+1}, S_{n+1} + 10^-(n+1)!] with S_n the n-term truncation.
    let log2_10 = std::f64::consts::LOG2_10;
    let mut n = 1;
    while ((factorial(n + 1) as f64) * log2_10) < bits as f64 + 1.0 {
        n += 1;
    }
    let s = liouville_partial_sum(n + 1);
    let w = BigRational::new(BigInt::one(), ten_pow(factorial(n + 1)));
    Interval::new(s.clone(), s + w)
}

/// S_n = sum_{k=1}^{n} 10^(-k!).
pub fn liouville_partial_sum(n: usize) -> BigRational {
    let den = ten_pow(factorial(n));
    let mut num = BigInt::zero();
    for k in 1..=n {
        num += ten_pow(factorial(n) - factorial(k));
    }
    BigRational::new(num, den)
}

/// Uniform sample in [0,1)^d: coordinate i uses the ChaCha stream i of `seed`.
pub fn sample_uniform(seed: u64, d: usize) -> Vec<RealTarget> {
    sample_uniform_with_budget(seed, d, DEFAULT_PRECISION_BITS)
}

pub fn sample_uniform_with_budget(seed: u64, d: usize, budget_bits: u32) -> Vec<RealTarget> {
    (0..d)
        .map(|i| RealTarget::with_budget(TargetSpec::Uniform { seed, coord: i as u32 }, budget_bits))
        .collect()
}

/// Parses a list of fixture names into a target vector.
pub fn parse_targets(specs: &[String], budget_bits: u32) -> Result<Vec<RealTarget>> {
    specs.iter().map(|s| RealTarget::parse_with_budget(s, budget_bits)).collect()
}

/// Truncation of the Liouville fixture after n terms together with a
/// certified enclosure of its error.
#[derive(Clone, Debug)]
pub struct LiouvilleTruncation {
    pub n: usize,
    pub rational: super::ReducedRational,
    pub error: Interval,
}

pub fn liouville_target(n: usize) -> Result<LiouvilleTruncation> {
    if n == 0 || n > 8 {
        return Err(Error::Domain(format!("liouville truncation order {n} outside 1..=8")));
    }
    let s = liouville_partial_sum(n);
    let next = factorial(n + 1);
    let e1 = BigRational::new(BigInt::one(), ten_pow(next));
    let error = Interval::new(e1.clone(), e1 * BigRational::from_integer(2.into()));
    Ok(LiouvilleTruncation { n, rational: super::ReducedRational::from_ratio(s), error })
}

impl LiouvilleTruncation {
    pub fn denominator_digits(&self) -> usize {
        self.rational.denom().to_string().len() - 1
    }
}
