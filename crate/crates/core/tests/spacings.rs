use num_bigint::BigUint;
use omegaspace_core::normality::{enumerate_normal_to, is_delta_normal};
use omegaspace_core::omega::omega_table;
use omegaspace_core::spacings::{
    poisson_moment, prime_spacing_survival, spacing_survival, surjection_count,
    surjection_count_big, uniform_baseline, window_count_moment, window_moment_via_correlations,
    SpacingStats,
};
use omegaspace_core::NormalityContext;
use proptest::prelude::*;

#[test]
fn dobinski_battery() {
    for m in 0..=10 {
        for lambda in [0.5, 1.0, 2.0, 4.0] {
            let p = poisson_moment(m, lambda).unwrap();
            assert!(p.relative_gap() <= 1e-12, "m = {m}, λ = {lambda}: {p:?}");
        }
    }
}

#[test]
fn bell_numbers_at_unit_rate() {
    let bell = [
        1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0, 4140.0, 21147.0, 115975.0,
    ];
    for (m, &b) in bell.iter().enumerate() {
        let p = poisson_moment(m as u32, 1.0).unwrap();
        assert!((p.surjection_sum - b).abs() <= 1e-12 * b, "m = {m}: {p:?}");
        assert!((p.series_sum - b).abs() <= 1e-12 * b, "m = {m}: {p:?}");
    }
}

#[test]
fn surjection_recurrence() {
    for m in 1..=15u32 {
        for r in 1..=15u32 {
            let lhs = surjection_count_big(m, r);
            let rhs = BigUint::from(r)
                * (surjection_count_big(m - 1, r) + surjection_count_big(m - 1, r - 1));
            assert_eq!(lhs, rhs, "m = {m}, r = {r}");
        }
    }
    assert_eq!(surjection_count(3, 2).unwrap(), 6);
    assert_eq!(surjection_count(2, 3).unwrap(), 0);
    assert_eq!(surjection_count(20, 20).unwrap(), 2_432_902_008_176_640_000);
    assert!(surjection_count(25, 25).is_err());
}

/// `#{(N, N′) normal : N ≤ x·s, 0 < N′ − N ≤ L}` by scanning a flag array.
fn pair_count(ctx: &NormalityContext, reach: u64) -> u128 {
    let limit = ctx.enumeration_limit();
    let t = omega_table(1, limit + reach + 1, None).unwrap();
    let normal: Vec<bool> = (1..=limit + reach)
        .map(|n| is_delta_normal(n, t.omega(n), ctx))
        .collect();
    let mut pairs = 0u128;
    for n in 1..=limit {
        if normal[n as usize - 1] {
            pairs += (n + 1..=n + reach)
                .filter(|&k| normal[k as usize - 1])
                .count() as u128;
        }
    }
    pairs
}

#[test]
fn first_moment_is_pair_count() {
    for x in [100_000.0, 1_000_000.0] {
        let ctx = NormalityContext::new(x, 0.25).unwrap();
        let reach = ctx.rescale.floor() as u64;
        let t = omega_table(1, ctx.enumeration_limit() + reach + 1, None).unwrap();
        let seq = enumerate_normal_to(&ctx, &t, ctx.enumeration_limit() + reach).unwrap();
        let w = window_count_moment(&ctx, &seq, 1, 1.0).unwrap();
        assert_eq!(w.reach, reach);
        assert_eq!(w.power_sum, pair_count(&ctx, reach), "x = {x}");
    }
}

#[test]
fn streaming_and_correlation_moments_agree() {
    let ctx = NormalityContext::new(100_000.0, 0.25).unwrap();
    for lambda in [1.0, 2.5, 4.0] {
        let reach = (lambda * ctx.rescale).floor() as u64;
        let t = omega_table(1, ctx.enumeration_limit() + reach + 1, None).unwrap();
        let seq = enumerate_normal_to(&ctx, &t, ctx.enumeration_limit() + reach).unwrap();
        for m in 1..=4 {
            let direct = window_count_moment(&ctx, &seq, m, lambda).unwrap();
            let corr = window_moment_via_correlations(&ctx, &t, m, lambda).unwrap();
            assert_eq!(direct, corr, "m = {m}, λ = {lambda}");
        }
    }
}

#[test]
fn spacings_telescope() {
    let ctx = NormalityContext::new(1_000_000.0, 0.25).unwrap();
    let t = omega_table(1, ctx.enumeration_limit() + 1, None).unwrap();
    let seq = enumerate_normal_to(&ctx, &t, ctx.enumeration_limit()).unwrap();
    let stats = SpacingStats::new(&seq).unwrap();
    let span = seq.values.last().unwrap() - seq.values[0];
    assert_eq!(stats.gaps.iter().sum::<u64>(), span);
    let float_span = stats.rescaled.last().unwrap() - stats.rescaled[0];
    let float_sum: f64 = stats.spacings.iter().sum();
    assert!((float_sum - float_span).abs() <= 1e-9 * float_span);
    assert!(stats.spacings.iter().all(|&d| d > 0.0));
    let mean = stats.mean_spacing().unwrap();
    assert!(mean > 0.5 && mean < 1.5, "mean spacing {mean}");
}

#[test]
fn uniform_baseline_battery() {
    for seed in [1u64, 2, 3, 42] {
        for lambda in [0.5, 1.0, 2.0] {
            let b = uniform_baseline(1000, lambda, 500, seed).unwrap();
            assert!(
                (b.empirical - b.exact).abs() <= 3.0 * b.std_err,
                "seed = {seed}, λ = {lambda}: {b:?}"
            );
        }
    }
    assert_eq!(
        uniform_baseline(100, 1.0, 10, 5).unwrap(),
        uniform_baseline(100, 1.0, 10, 5).unwrap()
    );
    assert!(uniform_baseline(10, 10.0, 1, 0).is_err());
}

#[test]
fn prime_gaps_near_exponential() {
    let r = prime_spacing_survival(100_000_000, 1.0).unwrap();
    assert!((r.survival - (-1.0f64).exp()).abs() <= 0.05, "{r:?}");
    assert_eq!(prime_spacing_survival(100, 10.0).unwrap().survival, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn survival_nonincreasing(
        points in prop::collection::vec(0.0f64..1000.0, 2..300),
        a in 0.01f64..5.0,
        b in 0.01f64..5.0,
    ) {
        let mut v = points;
        v.sort_by(f64::total_cmp);
        let i_max = v.len() - 1;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let s_lo = spacing_survival(&v, lo, i_max).unwrap();
        let s_hi = spacing_survival(&v, hi, i_max).unwrap();
        prop_assert!(s_hi <= s_lo);
        prop_assert!((0.0..=1.0).contains(&s_lo));
    }

    #[test]
    fn poisson_routes_agree(m in 0u32..=12, lambda in 0.05f64..8.0) {
        let p = poisson_moment(m, lambda).unwrap();
        prop_assert!(p.relative_gap() <= 1e-12, "{:?}", p);
    }
}
