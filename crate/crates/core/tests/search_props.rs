use heightlab::heights::{HeightKind, HeightValue};
use heightlab::numerics::{sample_uniform, RealTarget};
use std::cmp::Ordering;

use heightlab::numerics::cmp_disc_pow;
use heightlab::search::{brute_force_best, fast_best, records, solutions_count};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = HeightKind> {
    prop_oneof![
        Just(HeightKind::Max),
        Just(HeightKind::Prod),
        Just(HeightKind::ProdRoot),
        Just(HeightKind::Lcm),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn fast_agrees_with_brute(seed in 0u64..1_000_000, d in 1usize..=3, kind in kind_strategy(), b in 1u64..40, rooted in any::<bool>()) {
        let x = sample_uniform(seed, d);
        let bound = if kind == HeightKind::ProdRoot && rooted && d > 1 {
            HeightValue::new(b.pow(d as u32).min(2000), d as u32).unwrap()
        } else {
            HeightValue::integer(if d == 3 && kind != HeightKind::Prod && kind != HeightKind::ProdRoot { b.min(25) } else { b })
        };
        let slow = brute_force_best(&x, kind, &bound).unwrap();
        let fast = fast_best(&x, kind, &bound).unwrap();
        prop_assert_eq!(&slow.point, &fast.point);
        prop_assert_eq!(&slow.error, &fast.error);
        prop_assert!(slow.height <= bound);
    }

    #[test]
    fn fast_agrees_on_rational_targets(p1 in 0i64..30, q1 in 1i64..30, p2 in -30i64..30, q2 in 1i64..30, b in 1u64..40, kind in kind_strategy()) {
        let x: Vec<RealTarget> = vec![
            format!("dec:{p1}/{q1}").parse().unwrap(),
            format!("dec:{p2}/{q2}").parse().unwrap(),
        ];
        let bound = HeightValue::integer(b);
        let slow = brute_force_best(&x, kind, &bound).unwrap();
        let fast = fast_best(&x, kind, &bound).unwrap();
        prop_assert_eq!(&slow.point, &fast.point);
    }

    #[test]
    fn records_strictly_improve(seed in 0u64..1_000_000, d in 1usize..=3, kind in kind_strategy()) {
        let x = sample_uniform(seed, d);
        let cap = HeightValue::integer(if kind == HeightKind::Lcm { 3000 } else { 100_000 });
        let rs = records(&x, kind, &cap).unwrap();
        prop_assert!(!rs.is_empty());
        for w in rs.windows(2) {
            prop_assert!(w[0].height < w[1].height);
            prop_assert!(w[1].error.hi() < w[0].error.lo());
        }
        for r in &rs {
            prop_assert!(r.height <= cap);
        }
    }
}

#[test]
fn record_matches_best_at_its_height() {
    for seed in 0..20u64 {
        let x = sample_uniform(seed, 2);
        for kind in [HeightKind::Max, HeightKind::ProdRoot, HeightKind::Lcm] {
            let rs = records(&x, kind, &HeightValue::integer(400)).unwrap();
            for r in &rs {
                let best = fast_best(&x, kind, &r.height).unwrap();
                assert_eq!(best.point, r.point, "seed {seed} {kind}");
            }
        }
    }
}

fn linear_count(x: &RealTarget, qmax: u64, a: u32, b: u32) -> usize {
    let xf = x.to_f64();
    let mut n = 0;
    for q in 1..=qmax {
        let f = (xf * q as f64).floor() as i64;
        for p in f - 1..=f + 2 {
            if num_integer::gcd(p.unsigned_abs(), q) != 1 {
                continue;
            }
            let r = BigRational::new(p.into(), q.into());
            if cmp_disc_pow(x, &r, &BigInt::from(q), a, b).unwrap() == Ordering::Less {
                n += 1;
            }
        }
    }
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_dim_count_matches_linear_scan(
        seed in 0u64..1_000_000,
        ab in prop_oneof![Just((2u32, 1u32)), Just((5, 2)), Just((3, 1))],
        qmax in 1u64..1500,
    ) {
        let x: RealTarget = format!("seed:{seed}").parse().unwrap();
        let tau = BigRational::new(ab.0.into(), ab.1.into());
        let c = solutions_count(std::slice::from_ref(&x), HeightKind::Max, &tau, &HeightValue::integer(qmax)).unwrap();
        prop_assert_eq!(c.count, linear_count(&x, qmax, ab.0, ab.1));
    }
}

#[test]
fn fixture_counts_match_linear_scan() {
    for name in ["golden", "sqrt2", "e", "liouville"] {
        let x: RealTarget = name.parse().unwrap();
        for (a, b) in [(2u32, 1u32), (9, 4), (4, 1)] {
            let tau = BigRational::new(a.into(), b.into());
            let c = solutions_count(std::slice::from_ref(&x), HeightKind::Max, &tau, &HeightValue::integer(5000)).unwrap();
            assert_eq!(c.count, linear_count(&x, 5000, a, b), "{name} {a}/{b}");
        }
    }
}
