//! Desk-scale experiments: Monte Carlo exponent statistics, covering series,
//! box counting and the min-height growth test.

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{omega_estimate_capped, ExponentTrace, DEFAULT_WARMUP};
use crate::heights::{HeightKind, HeightValue};
use crate::numerics::{sample_uniform_with_budget, RealTarget, ReducedRational, DEFAULT_PRECISION_BITS};
use crate::search::{solutions_count_with, DEFAULT_ENUM_CAP, DEFAULT_SECONDARY_CAP_BITS};

pub const FORMAT_VERSION: u32 = 1;

/// Tolerances for the almost-everywhere exponent value 2. No convergence
/// rate is known, so these bands are engineering choices.
pub const MEDIAN_TOLERANCE: f64 = 0.15;
pub const TRIAL_TOLERANCE: f64 = 0.25;
pub const TRIAL_FRACTION: f64 = 0.9;
pub const EXPECTED_EXPONENT: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: String,
    pub d: usize,
    pub kind: HeightKind,
    pub tau: Option<ReducedRational>,
    pub base_seed: u64,
    pub trials: usize,
    pub height_cap: HeightValue,
    pub precision_bits: u32,
    pub enum_cap: u64,
    pub warmup: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn khintchine(d: usize, kind: HeightKind, trials: usize, base_seed: u64, cap: u64) -> Self {
        RunConfig {
            experiment: "khintchine".into(),
            d,
            kind,
            tau: None,
            base_seed,
            trials,
            height_cap: HeightValue::integer(cap),
            precision_bits: DEFAULT_PRECISION_BITS,
            enum_cap: DEFAULT_ENUM_CAP,
            warmup: DEFAULT_WARMUP,
            out: None,
        }
    }

    /// Directory holding the per-trial CSV traces, next to the JSON result.
    pub fn sidecar_dir(&self) -> Option<PathBuf> {
        self.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".traces");
            PathBuf::from(s)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub index: usize,
    pub seed: u64,
    /// "ok" or the error that stopped the trial.
    pub status: String,
    pub estimate: Option<f64>,
    pub estimate_lo: Option<f64>,
    pub estimate_hi: Option<f64>,
    pub running_max: Option<f64>,
    pub records: usize,
    pub tail_records: usize,
    pub last_height: Option<String>,
    /// Per-coordinate estimates (min height only).
    pub coordinate_estimates: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub completed: usize,
    pub median: Option<f64>,
    pub q10: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
    pub q90: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Fraction of all trials (failed ones count as outside) within the
    /// per-trial tolerance of the expected value.
    pub fraction_within: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub expected: f64,
    pub median: f64,
    pub trial: f64,
    pub trial_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub format_version: u32,
    pub config: RunConfig,
    pub trials: Vec<TrialRow>,
    pub aggregates: Aggregates,
    pub tolerances: Tolerances,
    pub predicates: Vec<Predicate>,
    pub wall_time_secs: f64,
}

impl RunResult {
    pub fn passed(&self) -> bool {
        self.predicates.iter().all(|p| p.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn aggregate(rows: &[TrialRow]) -> Aggregates {
    let mut v: Vec<f64> = rows.iter().filter_map(|r| r.estimate).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let within = v.iter().filter(|e| (*e - EXPECTED_EXPONENT).abs() <= TRIAL_TOLERANCE).count();
    Aggregates {
        trials: rows.len(),
        completed: v.len(),
        median: quantile(&v, 0.5),
        q10: quantile(&v, 0.1),
        q25: quantile(&v, 0.25),
        q75: quantile(&v, 0.75),
        q90: quantile(&v, 0.9),
        min: v.first().copied(),
        max: v.last().copied(),
        fraction_within: if rows.is_empty() { 0.0 } else { within as f64 / rows.len() as f64 },
    }
}

fn khintchine_predicates(a: &Aggregates) -> Vec<Predicate> {
    let median_ok = a.median.is_some_and(|m| (m - EXPECTED_EXPONENT).abs() <= MEDIAN_TOLERANCE);
    vec![
        Predicate {
            name: "median".into(),
            passed: median_ok,
            detail: format!("median {:?}, expected {EXPECTED_EXPONENT} +/- {MEDIAN_TOLERANCE}", a.median),
        },
        Predicate {
            name: "fraction_within".into(),
            passed: a.fraction_within >= TRIAL_FRACTION,
            detail: format!(
                "{:.3} of trials within +/- {TRIAL_TOLERANCE}, need {TRIAL_FRACTION}",
                a.fraction_within
            ),
        },
    ]
}

fn trial(cfg: &RunConfig, index: usize) -> (TrialRow, Option<ExponentTrace>) {
    let seed = cfg.base_seed.wrapping_add(index as u64);
    let x = sample_uniform_with_budget(seed, cfg.d, cfg.precision_bits);
    let mut row = TrialRow {
        index,
        seed,
        status: "ok".into(),
        estimate: None,
        estimate_lo: None,
        estimate_hi: None,
        running_max: None,
        records: 0,
        tail_records: 0,
        last_height: None,
        coordinate_estimates: Vec::new(),
    };
    match omega_estimate_capped(&x, cfg.kind, &cfg.height_cap, cfg.warmup, cfg.enum_cap) {
        Ok(t) => {
            row.estimate = Some(t.estimate.mid());
            row.estimate_lo = Some(t.estimate.lo);
            row.estimate_hi = Some(t.estimate.hi);
            row.running_max = t.running_max.last().map(|m| m.mid());
            row.records = t.entries.len();
            row.tail_records = t.entries.len() - t.tail_start;
            row.last_height = t.entries.last().map(|e| e.height.to_string());
            row.coordinate_estimates = t.coordinates.iter().map(|c| c.estimate.mid()).collect();
            (row, Some(t))
        }
        Err(e) => {
            row.status = e.to_string();
            (row, None)
        }
    }
}

/// Samples one uniform point per seed and records its final exponent estimate.
pub fn khintchine_experiment(cfg: &RunConfig) -> Result<RunResult> {
    if cfg.d < 2 {
        return Err(Error::Domain(format!("khintchine experiment needs d >= 2, got {}", cfg.d)));
    }
    if !matches!(cfg.kind, HeightKind::Max | HeightKind::ProdRoot | HeightKind::Min) {
        return Err(Error::Domain(format!("khintchine experiment does not cover kind {}", cfg.kind)));
    }
    let start = Instant::now();
    let results: Vec<(TrialRow, Option<ExponentTrace>)> =
        (0..cfg.trials).into_par_iter().map(|i| trial(cfg, i)).collect();
    let mut rows = Vec::with_capacity(results.len());
    if let Some(dir) = cfg.sidecar_dir() {
        fs::create_dir_all(&dir)?;
        for (row, t) in &results {
            if let Some(t) = t {
                let f = fs::File::create(dir.join(format!("trial_{:05}.csv", row.index)))?;
                t.write_csv(f)?;
            }
        }
    }
    for (row, _) in results {
        rows.push(row);
    }
    let aggregates = aggregate(&rows);
    let result = RunResult {
        format_version: FORMAT_VERSION,
        config: cfg.clone(),
        predicates: khintchine_predicates(&aggregates),
        trials: rows,
        aggregates,
        tolerances: Tolerances {
            expected: EXPECTED_EXPONENT,
            median: MEDIAN_TOLERANCE,
            trial: TRIAL_TOLERANCE,
            trial_fraction: TRIAL_FRACTION,
        },
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    if let Some(p) = &cfg.out {
        result.write_json(p)?;
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Covering series

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converges,
    /// Term exponent exactly -1.
    DivergesBoundary,
    Diverges,
}

impl Verdict {
    pub fn converges(self) -> bool {
        self == Verdict::Converges
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converges => "converges",
            Verdict::DivergesBoundary => "diverges (boundary)",
            Verdict::Diverges => "diverges",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialSum {
    pub q_max: u64,
    pub sum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesDiagnostic {
    pub kind: HeightKind,
    pub d: usize,
    pub tau: ReducedRational,
    pub s: ReducedRational,
    /// Exponent of q in the summand.
    pub exponent: ReducedRational,
    pub critical_exponent: ReducedRational,
    pub verdict: Verdict,
    pub partial_sums: Vec<PartialSum>,
}

pub const DEFAULT_Q_MAX: [u64; 4] = [100, 1_000, 10_000, 100_000];

/// Critical dimension 2d/tau.
pub fn critical_exponent(d: usize, tau: &BigRational) -> Result<BigRational> {
    if !tau.is_positive() {
        return Err(Error::Domain(format!("tau = {tau} must be positive")));
    }
    Ok(BigRational::from_integer(BigInt::from(2 * d)) / tau)
}

/// Summand exponent: 2d-1-tau*s for max, 1-tau*s/d (per factor) for prod^(1/d).
pub fn series_exponent(kind: HeightKind, d: usize, tau: &BigRational, s: &BigRational) -> Result<BigRational> {
    let dd = BigRational::from_integer(BigInt::from(d));
    match kind {
        HeightKind::Max => Ok(BigRational::from_integer(BigInt::from(2 * d as i64 - 1)) - tau * s),
        HeightKind::ProdRoot => Ok(BigRational::one() - tau * s / dd),
        k => Err(Error::Domain(format!("covering series is defined for max and prodroot, not {k}"))),
    }
}

fn neumaier_sum(e: f64, q_max: u64, from: u64, acc: (f64, f64)) -> (f64, f64) {
    let (mut sum, mut c) = acc;
    for q in from..=q_max {
        let t = (q as f64).powf(e);
        let s2 = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s2) + t;
        } else {
            c += (t - s2) + sum;
        }
        sum = s2;
    }
    (sum, c)
}

pub fn series_diagnostic(
    kind: HeightKind,
    d: usize,
    tau: &BigRational,
    s: &BigRational,
    q_max: &[u64],
) -> Result<SeriesDiagnostic> {
    if d == 0 {
        return Err(Error::Domain("d must be at least 1".into()));
    }
    if tau < &BigRational::from_integer(2.into()) {
        return Err(Error::Domain(format!("tau = {tau} must be at least 2")));
    }
    if !s.is_positive() {
        return Err(Error::Domain(format!("s = {s} must be positive")));
    }
    let e = series_exponent(kind, d, tau, s)?;
    let minus_one = -BigRational::one();
    let verdict = match e.cmp(&minus_one) {
        Ordering::Less => Verdict::Converges,
        Ordering::Equal => Verdict::DivergesBoundary,
        Ordering::Greater => Verdict::Diverges,
    };
    let crit = critical_exponent(d, tau)?;
    debug_assert_eq!(verdict.converges(), s > &crit);
    let ef = e.to_f64().unwrap_or(f64::NAN);
    let mut qs: Vec<u64> = q_max.to_vec();
    qs.sort_unstable();
    let mut partial_sums = Vec::with_capacity(qs.len());
    let mut acc = (0.0, 0.0);
    let mut done = 0u64;
    for q in qs {
        acc = neumaier_sum(ef, q, done + 1, acc);
        done = done.max(q);
        let base = acc.0 + acc.1;
        let sum = if kind == HeightKind::ProdRoot { base.powi(d as i32) } else { base };
        partial_sums.push(PartialSum { q_max: q, sum });
    }
    Ok(SeriesDiagnostic {
        kind,
        d,
        tau: ReducedRational::from_ratio(tau.clone()),
        s: ReducedRational::from_ratio(s.clone()),
        exponent: ReducedRational::from_ratio(e),
        critical_exponent: ReducedRational::from_ratio(crit),
        verdict,
        partial_sums,
    })
}

// ---------------------------------------------------------------------------
// Box counting

pub const MAX_GRID_LEVEL: u32 = 14;

#[derive(Clone, Debug, Serialize)]
pub struct LevelRow {
    pub level: u32,
    /// Ball centers with Theta^tau in (2^L / 2^tau, 2^L].
    pub centers: u64,
    pub count: u64,
    pub skipped: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxCount {
    pub kind: HeightKind,
    pub tau: ReducedRational,
    pub levels: Vec<LevelRow>,
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual of the fit, in natural-log units.
    pub residual: f64,
    /// Levels skipped because the height band held no denominator.
    pub flagged: Vec<u32>,
}

/// Theta^tau against 2^e, exactly, for Theta = base^(1/root) and tau = a/b.
fn theta_pow_cmp(base: u64, root: u32, a: u32, b: u32, e: &BigRational) -> Ordering {
    // base^(a/(b root)) vs 2^e  <=>  base^(a * den) vs 2^(num * b * root)
    let num = e.numer().to_u64().expect("non-negative exponent");
    let den = e.denom().to_u32().expect("small denominator");
    let lhs = BigInt::from(base).pow(a * den);
    let rhs = BigInt::one() << (num * b as u64 * root as u64);
    lhs.cmp(&rhs)
}

/// rho = Theta^(-tau) compared with t, exactly.
fn rho_cmp(base: u64, root: u32, a: u32, b: u32, t: &BigRational) -> Ordering {
    if t <= &BigRational::zero() {
        return Ordering::Greater;
    }
    // rho^(b root) = base^(-a); compare 1 with t^(b root) * base^a
    let tp = Pow::pow(t, b * root);
    let x = tp * BigRational::from_integer(BigInt::from(base).pow(a));
    BigRational::one().cmp(&x)
}

struct Ball {
    base: u64,
    root: u32,
    rho: f64,
}

/// Does the open sup-norm interval (c - rho, c + rho) meet cell [i/n, (i+1)/n)?
fn meets(ball: &Ball, a: u32, b: u32, p: u64, q: u64, n: u64, i: u64) -> bool {
    // need rho > c - (i+1)/n and rho > i/n - c
    let c = p as f64 / q as f64;
    let g = (c - (i + 1) as f64 / n as f64).max(i as f64 / n as f64 - c);
    let tol = 1e-9 * ball.rho.max(1.0 / n as f64);
    if ball.rho - g > tol {
        return true;
    }
    if g - ball.rho > tol {
        return false;
    }
    let cq = BigRational::new(BigInt::from(p), BigInt::from(q));
    let t1 = &cq - BigRational::new(BigInt::from(i + 1), BigInt::from(n));
    let t2 = BigRational::new(BigInt::from(i), BigInt::from(n)) - &cq;
    let t = if t1 > t2 { t1 } else { t2 };
    rho_cmp(ball.base, ball.root, a, b, &t) == Ordering::Greater
}

fn cell_range(ball: &Ball, a: u32, b: u32, p: u64, q: u64, n: u64) -> Option<(u64, u64)> {
    let c = p as f64 / q as f64;
    let guess_lo = ((c - ball.rho) * n as f64).floor().max(0.0) as u64;
    let guess_hi = (((c + ball.rho) * n as f64).ceil().max(0.0) as u64).min(n - 1);
    let mut lo = guess_lo.min(n - 1);
    while lo > 0 && meets(ball, a, b, p, q, n, lo - 1) {
        lo -= 1;
    }
    while lo < n && !meets(ball, a, b, p, q, n, lo) {
        lo += 1;
    }
    if lo >= n {
        return None;
    }
    let mut hi = guess_hi.max(lo);
    while hi + 1 < n && meets(ball, a, b, p, q, n, hi + 1) {
        hi += 1;
    }
    while hi > lo && !meets(ball, a, b, p, q, n, hi) {
        hi -= 1;
    }
    Some((lo, hi))
}

fn numerators(q: u64) -> Vec<u64> {
    if q == 1 {
        return vec![0, 1];
    }
    (1..q).filter(|p| p.gcd(&q) == 1).collect()
}

fn tau_u32(tau: &BigRational) -> Result<(u32, u32)> {
    match (tau.numer().to_u32(), tau.denom().to_u32()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Domain(format!("tau = {tau} is too large"))),
    }
}

fn in_band(base: u64, root: u32, a: u32, b: u32, level: u32, tau: &BigRational) -> bool {
    // band: 2^L / 2^tau < Theta^tau <= 2^L
    let top = BigRational::from_integer(BigInt::from(level));
    let bottom = &top - tau;
    let le_top = theta_pow_cmp(base, root, a, b, &top) != Ordering::Greater;
    let gt_bottom = bottom < BigRational::zero() || theta_pow_cmp(base, root, a, b, &bottom) == Ordering::Greater;
    le_top && gt_bottom
}

/// Denominator pairs (q1, q2) with Theta in the band at this level.
fn band_pairs(kind: HeightKind, a: u32, b: u32, level: u32, tau: &BigRational) -> Vec<(u64, u64, u64, u32)> {
    let tf = tau.to_f64().unwrap_or(f64::NAN);
    let theta_hi = 2f64.powf(level as f64 / tf) * (1.0 + 1e-9);
    let mut out = Vec::new();
    match kind {
        HeightKind::Max => {
            let top = theta_hi.floor() as u64;
            for m in 1..=top {
                if !in_band(m, 1, a, b, level, tau) {
                    continue;
                }
                for other in 1..=m {
                    out.push((m, other, m, 1));
                    if other != m {
                        out.push((other, m, m, 1));
                    }
                }
            }
        }
        _ => {
            let top = (theta_hi * theta_hi).floor() as u64;
            for q1 in 1..=top {
                for q2 in 1..=top / q1 {
                    let prod = q1 * q2;
                    if in_band(prod, 2, a, b, level, tau) {
                        out.push((q1, q2, prod, 2));
                    }
                }
            }
        }
    }
    out
}

fn level_count(kind: HeightKind, tau: &BigRational, a: u32, b: u32, level: u32) -> (u64, u64) {
    let n = 1u64 << level;
    let words = ((n * n) as usize).div_ceil(64);
    let mut bits = vec![0u64; words];
    let mut centers = 0u64;
    let tf = tau.to_f64().unwrap_or(f64::NAN);
    for (q1, q2, base, root) in band_pairs(kind, a, b, level, tau) {
        let theta = (base as f64).powf(1.0 / root as f64);
        let ball = Ball { base, root, rho: theta.powf(-tf) };
        let ps1 = numerators(q1);
        let ps2 = numerators(q2);
        let rows: Vec<(u64, u64)> = ps2.iter().filter_map(|&p| cell_range(&ball, a, b, p, q2, n)).collect();
        for &p1 in &ps1 {
            let Some((x0, x1)) = cell_range(&ball, a, b, p1, q1, n) else { continue };
            for &(y0, y1) in &rows {
                centers += 1;
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        let k = (y * n + x) as usize;
                        bits[k / 64] |= 1 << (k % 64);
                    }
                }
            }
        }
    }
    (centers, bits.iter().map(|w| w.count_ones() as u64).sum())
}

/// Grid-level box counts of the union of balls |x - r| < Theta(r)^(-tau),
/// Theta in the band tied to the grid scale, and the fitted log-log slope.
pub fn box_count_probe(kind: HeightKind, tau: &BigRational, d: usize, levels: &[u32]) -> Result<BoxCount> {
    if d != 2 {
        return Err(Error::Domain(format!("box counting is implemented for d = 2, got {d}")));
    }
    if !matches!(kind, HeightKind::Max | HeightKind::ProdRoot) {
        return Err(Error::Domain(format!("box counting covers max and prodroot, not {kind}")));
    }
    if tau < &BigRational::from_integer(2.into()) || tau > &BigRational::from_integer(8.into()) {
        return Err(Error::Domain(format!("tau = {tau} outside [2, 8]")));
    }
    if let Some(l) = levels.iter().find(|&&l| l > MAX_GRID_LEVEL) {
        return Err(Error::Domain(format!("grid level {l} exceeds {MAX_GRID_LEVEL}")));
    }
    if levels.len() < 3 {
        return Err(Error::Domain(format!("fit needs at least 3 levels, got {}", levels.len())));
    }
    let (a, b) = tau_u32(tau)?;
    let rows: Vec<LevelRow> = levels
        .par_iter()
        .map(|&level| {
            let (centers, count) = level_count(kind, tau, a, b, level);
            LevelRow { level, centers, count, skipped: count == 0 }
        })
        .collect();
    let flagged: Vec<u32> = rows.iter().filter(|r| r.skipped).map(|r| r.level).collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.skipped)
        .map(|r| (r.level as f64 * std::f64::consts::LN_2, (r.count as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} non-empty levels; fit needs at least 3",
            pts.len()
        )));
    }
    let (slope, intercept, residual) = least_squares(&pts);
    Ok(BoxCount {
        kind,
        tau: ReducedRational::from_ratio(tau.clone()),
        levels: rows,
        slope,
        intercept,
        residual,
        flagged,
    })
}

/// Ordinary least squares fit y = slope x + intercept, with RMS residual.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

// ---------------------------------------------------------------------------
// Min decomposition

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Growing,
    Stagnating,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinSplitRow {
    pub label: String,
    pub targets: Vec<String>,
    pub counts: Vec<usize>,
    pub exact: Vec<bool>,
    pub growth: Growth,
    pub predicted: Growth,
}

impl MinSplitRow {
    pub fn passed(&self) -> bool {
        self.growth == self.predicted
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinSplit {
    pub tau: ReducedRational,
    pub caps: Vec<u64>,
    pub rows: Vec<MinSplitRow>,
}

impl MinSplit {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed())
    }
}

pub const DEFAULT_MIN_SPLIT_CAPS: [u64; 3] = [1_000, 100_000, 10_000_000];

fn growth(counts: &[usize]) -> Growth {
    if counts.windows(2).all(|w| w[0] < w[1]) {
        Growth::Growing
    } else if counts.len() >= 2 && counts[counts.len() - 1] == counts[counts.len() - 2] {
        Growth::Stagnating
    } else {
        Growth::Neither
    }
}

/// Counts min-height solutions for a Liouville-type point (predicted to grow
/// without bound), its coordinate swap, and a badly approximable pair.
pub fn min_split_experiment(tau: &BigRational, caps: &[u64]) -> Result<MinSplit> {
    if tau <= &BigRational::from_integer(2.into()) {
        return Err(Error::Domain(format!("tau = {tau} must exceed 2")));
    }
    let fixtures: [(&str, [&str; 2], Growth); 3] = [
        ("A", ["liouville", "golden"], Growth::Growing),
        ("A swapped", ["golden", "liouville"], Growth::Growing),
        ("B", ["golden", "sqrt2"], Growth::Stagnating),
    ];
    let rows = fixtures
        .par_iter()
        .map(|(label, names, predicted)| {
            let x: Vec<RealTarget> = names.iter().map(|s| s.parse()).collect::<Result<_>>()?;
            let mut counts = Vec::new();
            let mut exact = Vec::new();
            for &c in caps {
                let sc = solutions_count_with(
                    &x,
                    HeightKind::Min,
                    tau,
                    &HeightValue::integer(c),
                    DEFAULT_ENUM_CAP,
                    DEFAULT_SECONDARY_CAP_BITS,
                )?;
                counts.push(sc.count);
                exact.push(sc.exact);
            }
            Ok(MinSplitRow {
                label: label.to_string(),
                targets: names.iter().map(|s| s.to_string()).collect(),
                growth: growth(&counts),
                counts,
                exact,
                predicted: *predicted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MinSplit { tau: ReducedRational::from_ratio(tau.clone()), caps: caps.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        crate::numerics::parse_exact(s).unwrap()
    }

    #[test]
    fn series_examples() {
        let b = series_diagnostic(HeightKind::Max, 2, &q("4"), &q("1"), &DEFAULT_Q_MAX).unwrap();
        assert_eq!(b.exponent.as_ratio(), &q("-1"));
        assert_eq!(b.verdict, Verdict::DivergesBoundary);
        let c = series_diagnostic(HeightKind::Max, 2, &q("4"), &q("1.1"), &DEFAULT_Q_MAX).unwrap();
        assert_eq!(c.exponent.as_ratio(), &q("-7/5"));
        assert!(c.verdict.converges());
        assert_eq!(critical_exponent(3, &q("6")).unwrap(), q("1"));
        // harmonic partial sum oracle
        let h: f64 = (1..=100).map(|k| 1.0 / k as f64).sum();
        assert!((b.partial_sums[0].sum - h).abs() < 1e-12);
    }

    #[test]
    fn series_prodroot_is_power_of_one_dim_sum() {
        let r = series_diagnostic(HeightKind::ProdRoot, 3, &q("4"), &q("2"), &[50]).unwrap();
        let one: f64 = (1..=50).map(|k| (k as f64).powf(1.0 - 8.0 / 3.0)).sum();
        assert!((r.partial_sums[0].sum - one.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), Some(2.5));
        assert_eq!(quantile(&v, 0.0), Some(1.0));
        assert_eq!(quantile(&[], 0.5), None);
    }

    #[test]
    fn fit_needs_three_levels() {
        let r = box_count_probe(HeightKind::Max, &q("4"), 2, &[8]);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn box_count_small_level_by_hand() {
        // level 2, tau 2: Theta^2 in (1, 4], so Theta = 2 and rho = 1/4.
        // 1/2 covers cells {1, 2}, 0/1 covers {0}, 1/1 covers {3}; centers are
        // (1/2, 1/2) and the four pairings of 1/2 with 0/1 or 1/1.
        let (centers, count) = level_count(HeightKind::Max, &q("2"), 2, 1, 2);
        assert_eq!(centers, 5);
        // rows {1,2} x cols {0,1,2,3} and cols {1,2} x rows {0,3}
        assert_eq!(count, 12);
    }

    #[test]
    fn box_count_saturates_at_dirichlet_exponent() {
        let levels: Vec<u32> = (6..=11).collect();
        let b = box_count_probe(HeightKind::Max, &q("2"), 2, &levels).unwrap();
        assert!(b.slope > 1.7 && b.slope < 2.1, "{}", b.slope);
    }

    #[test]
    fn growth_classes() {
        assert_eq!(growth(&[1, 2, 3]), Growth::Growing);
        assert_eq!(growth(&[2, 3, 3]), Growth::Stagnating);
        assert_eq!(growth(&[3, 2, 4]), Growth::Neither);
    }

    #[test]
    fn khintchine_is_reproducible() {
        let cfg = RunConfig::khintchine(2, HeightKind::Max, 2, 7, 100_000);
        let a = khintchine_experiment(&cfg).unwrap();
        let b = khintchine_experiment(&cfg).unwrap();
        assert_eq!(a.trials, b.trials);
        assert_eq!(a.aggregates, b.aggregates);
        let rows = serde_json::to_string(&a.trials).unwrap();
        assert_eq!(rows, serde_json::to_string(&b.trials).unwrap());
    }
}
