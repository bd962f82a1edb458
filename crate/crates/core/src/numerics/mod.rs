//! Exact rationals, certified real targets and error comparisons.

mod compare;
mod interval;
mod rational;
mod target;

pub use compare::{certified_disc, cmp_disc, cmp_disc_pow, cmp_disc_value, disc_filter, disc_interval};
pub(crate) use compare::schedule;
pub use interval::{ln_bigint, ln_interval, ln_ratio, F64Interval, Interval};
pub use rational::{parse_exact, RationalPoint, ReducedRational};
pub use target::{
    liouville_partial_sum, liouville_target, parse_targets, sample_uniform, sample_uniform_with_budget,
    Approx, CfPattern, LiouvilleTruncation, QuadraticFixture, RealTarget, TargetSpec,
    DEFAULT_PRECISION_BITS,
};

use num_rational::BigRational;

use crate::error::Result;

/// Certified sup-norm error max_i |x_i - r_i|.
pub fn point_error(x: &[RealTarget], r: &RationalPoint) -> Result<Interval> {
    assert_eq!(x.len(), r.dim(), "dimension mismatch");
    let mut acc: Option<Interval> = None;
    for (t, ri) in x.iter().zip(r.coords()) {
        let e = certified_disc(t, ri.as_ratio())?;
        acc = Some(match acc {
            None => e,
            Some(a) => a.max(&e),
        });
    }
    Ok(acc.expect("non-empty point"))
}

/// Exact sup-norm error when every coordinate is rational.
pub fn exact_point_error(x: &[BigRational], r: &RationalPoint) -> BigRational {
    use num_traits::Signed;
    x.iter()
        .zip(r.coords())
        .map(|(a, b)| (a - b.as_ratio()).abs())
        .max()
        .expect("non-empty point")
}
