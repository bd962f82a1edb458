//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (no libtest harness). Pass criterion numbers as
//! arguments to run a subset. The process exits non-zero on a failed
//! criterion only when HEIGHTLAB_ACCEPTANCE_STRICT is set, so the rest of the
//! workspace suite still runs after a red criterion.

use std::time::Instant;

use heightlab::cf::{expand, gap_inequality_check, ConvergentTable};
use heightlab::experiments::{
    box_count_probe, khintchine_experiment, min_split_experiment, series_diagnostic, RunConfig,
};
use heightlab::exponents::quotient;
use heightlab::heights::{fs_exponent, HeightKind, HeightValue};
use heightlab::numerics::{parse_exact, sample_uniform, RealTarget};
use heightlab::search::{brute_force_best, fast_best, records};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (usize, &'static str, fn() -> Outcome);

fn q(s: &str) -> BigRational {
    parse_exact(s).unwrap()
}

fn table_ok(t: &ConvergentTable, x: &RealTarget) -> Result<(), String> {
    let mut prev_q = BigInt::from(0);
    for n in 0..=t.len() as isize {
        let (p1, q1) = t.pq(n).unwrap();
        let (p0, q0) = t.pq(n - 1).unwrap();
        let det = &p1 * &q0 - &p0 * &q1;
        let want = if n % 2 == 0 { -BigInt::one() } else { BigInt::one() };
        if det != want {
            return Err(format!("{x}: determinant at n={n} is {det}"));
        }
        if n >= 1 {
            if p1.gcd(&q1) != BigInt::one() {
                return Err(format!("{x}: gcd(p_{n}, q_{n}) != 1"));
            }
            if q1 < prev_q || (n >= 2 && q1 <= prev_q) {
                return Err(format!("{x}: q_{n} not increasing"));
            }
        }
        prev_q = q1;
    }
    for n in 1..t.len() {
        let c = gap_inequality_check(t, x, n).map_err(|e| e.to_string())?;
        if !c.holds() {
            return Err(format!("{x}: gap inequality fails at n={n}"));
        }
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for name in ["golden", "sqrt2", "e"] {
        let x: RealTarget = name.parse().unwrap();
        let t = expand(&x, 40).unwrap();
        if t.len() < 30 {
            return (false, format!("{name}: only {} quotients", t.len()));
        }
        if let Err(e) = table_ok(&t, &x) {
            return (false, e);
        }
        checked += 1;
    }
    for seed in 0..1000u64 {
        let x = sample_uniform(seed, 1).remove(0);
        let t = expand(&x, 20).unwrap();
        if t.len() < 15 {
            return (false, format!("seed {seed}: only {} quotients", t.len()));
        }
        if let Err(e) = table_ok(&t, &x) {
            return (false, e);
        }
        checked += 1;
    }
    (true, format!("{checked} targets, identities and gap inequality certified"))
}

fn criterion_2() -> Outcome {
    let kinds = [HeightKind::Max, HeightKind::Prod, HeightKind::ProdRoot, HeightKind::Lcm];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut mismatches = Vec::new();
    let mut instances = 0;
    for d in 1..=3usize {
        for kind in kinds {
            for _ in 0..100 {
                let seed = rng.next_u64() % 1_000_000_000;
                let top = if d == 1 { 200 } else { 60 };
                let b = 1 + rng.next_u64() % top;
                let rooted = kind == HeightKind::ProdRoot && d > 1 && (d == 3 || rng.next_u64() % 2 == 0);
                let bound = if rooted {
                    HeightValue::new(b, d as u32).unwrap()
                } else {
                    HeightValue::integer(b)
                };
                let x = sample_uniform(seed, d);
                let slow = brute_force_best(&x, kind, &bound);
                let fast = fast_best(&x, kind, &bound);
                instances += 1;
                match (slow, fast) {
                    (Ok(s), Ok(f)) if s.point == f.point && s.error == f.error => {}
                    (s, f) => mismatches.push(format!(
                        "d={d} {kind} seed={seed} bound={bound}: brute {:?} fast {:?}",
                        s.map(|r| r.point.to_string()),
                        f.map(|r| r.point.to_string())
                    )),
                }
            }
        }
    }
    match mismatches.first() {
        None => (true, format!("{instances} instances, 0 mismatches")),
        Some(m) => (false, format!("{} mismatches, first: {m}", mismatches.len())),
    }
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut cells = Vec::new();
    for d in [2usize, 3] {
        for kind in [HeightKind::Max, HeightKind::ProdRoot, HeightKind::Min] {
            let cfg = RunConfig::khintchine(d, kind, 200, 1, 1_000_000);
            let r = khintchine_experiment(&cfg).unwrap();
            ok &= r.passed();
            cells.push(format!(
                "d={d} {kind}: median {:.4} within {:.3} [{}]",
                r.aggregates.median.unwrap_or(f64::NAN),
                r.aggregates.fraction_within,
                if r.passed() { "ok" } else { "red" }
            ));
        }
    }
    (ok, cells.join("; "))
}

fn criterion_4() -> Outcome {
    let d3 = 3f64 / 4f64.cbrt();
    let cases: Vec<(HeightKind, usize, f64)> = vec![
        (HeightKind::Max, 3, d3),
        (HeightKind::Min, 2, 2.0),
        (HeightKind::Min, 3, 2.0),
        (HeightKind::Min, 5, 2.0),
        (HeightKind::Prod, 2, 1.0),
        (HeightKind::ProdRoot, 2, 2.0),
        (HeightKind::ProdRoot, 4, 2.0),
        (HeightKind::Lcm, 2, 1.5),
    ];
    for (kind, d, want) in cases {
        let iv = match fs_exponent(kind, d) {
            Ok(iv) => iv,
            Err(e) => return (false, format!("({kind},{d}): {e}")),
        };
        let f = iv.to_f64();
        if f.hi - f.lo > 1e-9 || f.lo > want + 1e-9 || f.hi < want - 1e-9 {
            return (false, format!("({kind},{d}): [{}, {}] vs {want}", f.lo, f.hi));
        }
    }
    // printed value 1.889881575 agrees to the stated precision
    let f = fs_exponent(HeightKind::Max, 3).unwrap().to_f64();
    if (f.lo - 1.889881575).abs() > 1e-9 {
        return (false, format!("(max,3) = {}", f.lo));
    }
    (true, format!("8 closed forms within 1e-9; (max,3) = [{:.12}, {:.12}]", f.lo, f.hi))
}

fn criterion_5() -> Outcome {
    let mut verdict_bad = 0;
    let mut div_bad = 0;
    let mut conv_bad = 0;
    let mut cells = 0;
    let mut first = None;
    for kind in [HeightKind::Max, HeightKind::ProdRoot] {
        for d in 1..=4usize {
            for tau in [2, 3, 4, 6, 8] {
                let t = BigRational::from_integer(tau.into());
                for k in 1..=20 {
                    let s = BigRational::new(k.into(), 4.into());
                    let r = series_diagnostic(kind, d, &t, &s, &[10_000, 100_000]).unwrap();
                    cells += 1;
                    let crit = BigRational::from_integer((2 * d).into()) / &t;
                    if r.verdict.converges() != (s > crit) {
                        verdict_bad += 1;
                    }
                    let (s4, s5) = (r.partial_sums[0].sum, r.partial_sums[1].sum);
                    if !r.verdict.converges() && s5 <= 10.0 * s4 {
                        div_bad += 1;
                        first.get_or_insert(format!("divergent {kind} d={d} tau={tau} s={s}: ratio {:.3}", s5 / s4));
                    }
                    if s >= crit + q("1/4") && s5 / s4 >= 1.05 {
                        conv_bad += 1;
                        first.get_or_insert(format!("convergent {kind} d={d} tau={tau} s={s}: ratio {:.3}", s5 / s4));
                    }
                }
            }
        }
    }
    let ok = verdict_bad == 0 && div_bad == 0 && conv_bad == 0;
    (
        ok,
        format!(
            "{cells} cells: verdict mismatches {verdict_bad}, divergent cells below 10x {div_bad}, \
             convergent cells above 5% {conv_bad}{}",
            first.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_6() -> Outcome {
    let levels: Vec<u32> = (6..=14).collect();
    let b = box_count_probe(HeightKind::Max, &q("4"), 2, &levels).unwrap();
    let ok = (b.slope - 1.0).abs() <= 0.3;
    (ok, format!("slope {:.4}, residual {:.4}, flagged levels {:?}", b.slope, b.residual, b.flagged))
}

fn criterion_7() -> Outcome {
    let m = min_split_experiment(&q("5"), &[1_000, 100_000, 10_000_000]).unwrap();
    let detail = m
        .rows
        .iter()
        .map(|r| format!("{} {:?} {:?} (predicted {:?})", r.label, r.counts, r.growth, r.predicted))
        .collect::<Vec<_>>()
        .join("; ");
    (m.passed(), detail)
}

fn criterion_8() -> Outcome {
    let cap = 1_000_000u64;
    let mut checked = 0;
    for seed in 0..50u64 {
        let x = sample_uniform(10_000 + seed, 2);
        let a = records(&x, HeightKind::Prod, &HeightValue::integer(cap)).unwrap();
        let b = records(&x, HeightKind::ProdRoot, &HeightValue::new(cap, 2).unwrap()).unwrap();
        if a.len() != b.len() {
            return (false, format!("seed {seed}: {} vs {} records", a.len(), b.len()));
        }
        for (ra, rb) in a.iter().zip(&b) {
            if ra.point != rb.point {
                return (false, format!("seed {seed}: record points differ"));
            }
            let (Some(qa), Some(qb)) = (quotient(&ra.error, &ra.height), quotient(&rb.error, &rb.height)) else {
                continue;
            };
            let twice = qa.scale(2.0);
            let tol = 4.0 * (twice.width() + qb.width()) + 1e-12;
            if !twice.overlaps(&qb) || (twice.mid() - qb.mid()).abs() > tol {
                return (false, format!("seed {seed}: {twice:?} vs {qb:?}"));
            }
            checked += 1;
        }
    }
    (true, format!("{checked} records on 50 points"))
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 8] = [
        (1, "continued fraction correctness", criterion_1),
        (2, "fast search equals brute force", criterion_2),
        (3, "almost-everywhere exponent 2", criterion_3),
        (4, "Dirichlet exponent closed forms", criterion_4),
        (5, "covering series verdict and partial sums", criterion_5),
        (6, "box-count slope", criterion_6),
        (7, "min-height decomposition growth", criterion_7),
        (8, "prodroot quotient is twice prod quotient", criterion_8),
    ];
    let mut failed = 0;
    for (n, title, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {n} ({title}): {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 && std::env::var_os("HEIGHTLAB_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
