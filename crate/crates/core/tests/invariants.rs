use heightlab::cf::expand;
use heightlab::experiments::{series_diagnostic, Verdict};
use heightlab::exponents::{c_estimate, omega_estimate_with};
use heightlab::heights::{height, HeightKind, HeightValue};
use heightlab::numerics::{sample_uniform, RationalPoint, RealTarget, ReducedRational};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn point(pairs: &[(i64, i64)]) -> RationalPoint {
    RationalPoint::new(pairs.iter().map(|&(p, q)| ReducedRational::new(p, q).unwrap()).collect())
}

fn pairs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-500i64..500, 1i64..500), 1..=4)
}

proptest! {
    #[test]
    fn height_chain(v in pairs()) {
        let r = point(&v);
        let h = |k| height(&r, k);
        prop_assert!(h(HeightKind::Min) <= h(HeightKind::ProdRoot));
        prop_assert!(h(HeightKind::ProdRoot) <= h(HeightKind::Max));
        prop_assert!(h(HeightKind::Max) <= h(HeightKind::Lcm));
        prop_assert!(h(HeightKind::Lcm) <= h(HeightKind::Prod));
    }

    #[test]
    fn height_is_scale_free_in_numerators(v in pairs(), shift in -5i64..5) {
        // H depends on denominators only
        let moved: Vec<(i64, i64)> = v.iter().map(|&(p, q)| (p + shift * q, q)).collect();
        for k in HeightKind::ALL {
            prop_assert_eq!(height(&point(&v), k), height(&point(&moved), k));
        }
    }

    #[test]
    fn height_value_order_matches_reals(a in 1u64..10_000, ra in 1u32..4, b in 1u64..10_000, rb in 1u32..4) {
        let x = HeightValue::new(a, ra).unwrap();
        let y = HeightValue::new(b, rb).unwrap();
        let fx = (a as f64).powf(1.0 / ra as f64);
        let fy = (b as f64).powf(1.0 / rb as f64);
        if (fx - fy).abs() > 1e-9 * fx.max(fy) {
            prop_assert_eq!(x < y, fx < fy);
        }
    }

    #[test]
    fn refinements_nest(seed in any::<u64>(), coord in 0u32..3) {
        let x: RealTarget = format!("seed:{seed}:{coord}").parse().unwrap();
        let mut prev = x.refine(16).unwrap();
        for bits in [32, 64, 200, 1000] {
            let next = x.refine(bits).unwrap();
            prop_assert!(prev.contains_interval(&next));
            prev = next;
        }
        // refine is a pure function of (target, bits)
        prop_assert_eq!(x.refine(64).unwrap(), x.refine(64).unwrap());
    }

    #[test]
    fn cf_identities_random(seed in any::<u64>()) {
        let x = sample_uniform(seed, 1).remove(0);
        let t = expand(&x, 25).unwrap();
        for n in 1..=t.len() as isize {
            let (p1, q1) = t.pq(n).unwrap();
            let (p0, q0) = t.pq(n - 1).unwrap();
            let sign = if n % 2 == 0 { -1 } else { 1 };
            prop_assert_eq!(&p1 * &q0 - &p0 * &q1, BigInt::from(sign));
            let iv = x.refine(4096).unwrap();
            // alternating sides: even convergents below x, odd above
            let c = BigRational::new(p1, q1);
            if n % 2 == 0 { prop_assert!(&c < iv.lo()); } else { prop_assert!(&c > iv.hi()); }
        }
    }

    #[test]
    fn cf_of_rational_reconstructs(p in 0i64..10_000, q in 1i64..10_000) {
        prop_assume!(p < q);
        let v = BigRational::new(p.into(), q.into());
        let t = expand(&RealTarget::rational(v.clone()), 64).unwrap();
        let (pn, qn) = t.pq(t.len() as isize).unwrap();
        prop_assert_eq!(BigRational::new(pn, qn), v);
    }

    #[test]
    fn series_verdict_is_exponent_inequality(d in 1usize..=4, tau in prop_oneof![Just(2), Just(3), Just(4), Just(6), Just(8)], k in 1i64..=24) {
        let t = BigRational::from_integer(tau.into());
        let s = BigRational::new(k.into(), 4.into());
        let crit = BigRational::from_integer((2 * d).into()) / &t;
        for kind in [HeightKind::Max, HeightKind::ProdRoot] {
            let r = series_diagnostic(kind, d, &t, &s, &[100]).unwrap();
            prop_assert_eq!(r.verdict.converges(), s > crit);
            prop_assert_eq!(r.verdict == Verdict::DivergesBoundary, s == crit);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn traces_are_monotone(seed in 0u64..1_000_000, d in 1usize..=3) {
        let x = sample_uniform(seed, d);
        let cap = HeightValue::integer(200_000);
        let Ok(t) = omega_estimate_with(&x, HeightKind::Max, &cap, 100) else { return Ok(()) };
        for w in t.running_max.windows(2) {
            prop_assert!(w[0].lo <= w[1].lo && w[0].hi <= w[1].hi);
        }
        for w in t.entries.windows(2) {
            prop_assert!(w[0].height < w[1].height);
        }
        let tau = BigRational::new(3.into(), 2.into());
        if let Ok(c) = c_estimate(&x, HeightKind::Max, &tau, &cap) {
            for w in c.running_min.windows(2) {
                prop_assert!(w[1].lo <= w[0].lo && w[1].hi <= w[0].hi);
            }
        }
    }

    #[test]
    fn min_estimate_is_max_over_coordinates(seed in 0u64..1_000_000) {
        let x = sample_uniform(seed, 2);
        let cap = HeightValue::integer(100_000);
        let Ok(t) = omega_estimate_with(&x, HeightKind::Min, &cap, 100) else { return Ok(()) };
        let mut best = f64::NEG_INFINITY;
        for xi in &x {
            let one = omega_estimate_with(std::slice::from_ref(xi), HeightKind::Max, &cap, 100).unwrap();
            best = best.max(one.estimate.mid());
        }
        prop_assert!((t.estimate.mid() - best).abs() < 1e-12);
    }
}
