use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use omegaspace_core::fmodel::{
    abs_diff_f64, correlation_main_term, expansion_check, f_average_direct, f_average_divisor_sum,
    f_m, f_p, factorize, k_coefficient, FactoredTuple, MAX_EXPANSION_PRIMES,
};
use omegaspace_core::primes::primes_up_to;
use omegaspace_core::PrimeWindow;
use proptest::prelude::*;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Coprime pairs drawn from square-full numbers up to 200 and a few
/// numbers with a simple prime factor.
fn battery() -> Vec<(u64, u64)> {
    let mut values: Vec<u64> = (2..=200)
        .filter(|&a| factorize(a).is_square_full())
        .collect();
    values.extend([2, 3, 6, 7, 12, 18, 45, 50]);
    let mut pairs = Vec::new();
    for &a in &values {
        for &b in &values {
            if gcd(a, b) == 1 {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

#[test]
fn error_within_tau_bound() {
    for (a, b) in battery() {
        let t = FactoredTuple::new(&[a, b]).unwrap();
        let main = correlation_main_term(&t).unwrap();
        let tau = t.tau_squared_product() as f64;
        for x in [100_000u64, 1_000_000, 10_000_000] {
            let avg = f_average_divisor_sum(x, &t, &[0, 1]).unwrap();
            let err = abs_diff_f64(&avg, &main);
            assert!(
                err <= 10.0 * tau / x as f64,
                "a = ({a}, {b}), x = {x}: {err}"
            );
        }
    }
}

// The error is a bounded periodic function of x divided by x, so the
// ratio between consecutive decades oscillates rather than sitting near 10.
#[test]
#[ignore = "error ratios across decades range from 1 to 50; the residue term is periodic in x"]
fn error_shrinks_tenfold_per_decade() {
    for (a, b) in battery() {
        let t = FactoredTuple::new(&[a, b]).unwrap();
        let main = correlation_main_term(&t).unwrap();
        let errs: Vec<f64> = [100_000u64, 1_000_000, 10_000_000]
            .iter()
            .map(|&x| abs_diff_f64(&f_average_divisor_sum(x, &t, &[0, 1]).unwrap(), &main))
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                (10.0 / 3.0..=30.0).contains(&ratio),
                "a = ({a}, {b}): {errs:?}"
            );
        }
    }
}

#[test]
fn direct_and_divisor_sums_agree() {
    for (a, b) in battery().into_iter().step_by(7) {
        let t = FactoredTuple::new(&[a, b]).unwrap();
        for x in [1u64, 97, 10_000, 100_000] {
            assert_eq!(
                f_average_direct(x, &t, &[0, 1]).unwrap(),
                f_average_divisor_sum(x, &t, &[0, 1]).unwrap(),
                "a = ({a}, {b}), x = {x}"
            );
        }
    }
    let t = FactoredTuple::new(&[4, 9, 25]).unwrap();
    assert_eq!(
        f_average_direct(30_000, &t, &[0, 2, 7]).unwrap(),
        f_average_divisor_sum(30_000, &t, &[0, 2, 7]).unwrap()
    );
}

#[test]
fn main_term_is_bernoulli_expectation() {
    for p in primes_up_to(13) {
        for alpha in 1..=6u32 {
            let a = p.pow(alpha);
            let t = FactoredTuple::new(&[a]).unwrap();
            // E[f_p(N)^α] with p | N of probability 1/p, averaged over one period
            let mut mean = BigRational::zero();
            for n in 1..=p {
                let v = f_p(n, p).unwrap();
                mean += num_traits::pow(v, alpha as usize);
            }
            mean /= BigRational::from_integer(BigInt::from(p));
            assert_eq!(
                correlation_main_term(&t).unwrap(),
                mean,
                "p = {p}, α = {alpha}"
            );
        }
    }
}

#[test]
fn main_term_examples() {
    assert_eq!(
        correlation_main_term(&FactoredTuple::new(&[4]).unwrap()).unwrap(),
        q(1, 4)
    );
    assert_eq!(
        correlation_main_term(&FactoredTuple::new(&[9]).unwrap()).unwrap(),
        q(2, 9)
    );
    assert_eq!(
        correlation_main_term(&FactoredTuple::new(&[4, 9]).unwrap()).unwrap(),
        q(1, 18)
    );
    assert!(
        correlation_main_term(&FactoredTuple::new(&[12, 25]).unwrap())
            .unwrap()
            .is_zero()
    );
    assert!(correlation_main_term(&FactoredTuple::new(&[4, 6]).unwrap()).is_err());
}

#[test]
fn multiplicative_on_coprime_pairs() {
    let mut checked = 0;
    for m in (1..=10_000u64).step_by(97) {
        for m2 in (1..=10_000u64).step_by(89) {
            if gcd(m, m2) != 1 || m * m2 > 10_000 {
                continue;
            }
            let (fa, fb, fab) = (factorize(m), factorize(m2), factorize(m * m2));
            for n in [1u64, 2, 30, 210, 9_999, 10_000] {
                assert_eq!(
                    f_m(n, &fab),
                    f_m(n, &fa) * f_m(n, &fb),
                    "m = {m}, m' = {m2}, n = {n}"
                );
            }
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn k_examples() {
    let k = k_coefficient(&FactoredTuple::new(&[1]).unwrap()).unwrap();
    assert_eq!((k.re, k.im), (BigRational::one(), BigRational::zero()));
    let k = k_coefficient(&FactoredTuple::new(&[12]).unwrap()).unwrap();
    assert_eq!((k.re, k.im), (BigRational::zero(), q(-1, 2)));
}

fn small_coprime_tuple() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..5_000, 1..4).prop_filter("pairwise coprime", |v| {
        v.iter()
            .enumerate()
            .all(|(i, &a)| v[i + 1..].iter().all(|&b| gcd(a, b) == 1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplicative_random(m in 1u64..=100, m2 in 1u64..=100, n in 1u64..1_000_000) {
        prop_assume!(gcd(m, m2) == 1);
        prop_assert_eq!(
            f_m(n, &factorize(m * m2)),
            f_m(n, &factorize(m)) * f_m(n, &factorize(m2))
        );
    }

    #[test]
    fn k_modulus_at_most_one(values in small_coprime_tuple()) {
        let k = k_coefficient(&FactoredTuple::new(&values).unwrap()).unwrap();
        prop_assert!(k.norm_sqr() <= BigRational::one());
    }

    #[test]
    fn expansion_residual_within_tail(
        n in 1u64..1_000_000,
        y in 1.0f64..40.0,
        t in -2.0f64..2.0,
        order in 0u32..16,
    ) {
        let window = PrimeWindow::new(y, y + 20.0).unwrap();
        prop_assume!(window.len() <= MAX_EXPANSION_PRIMES);
        let c = expansion_check(n, &window, t, order).unwrap();
        prop_assert!(c.within_tail(), "{:?}", c);
    }

    #[test]
    fn averages_agree_on_random_tuples(values in small_coprime_tuple(), x in 1u64..3_000) {
        let t = FactoredTuple::new(&values).unwrap();
        let shifts: Vec<u64> = (0..values.len() as u64).map(|i| 3 * i).collect();
        prop_assert_eq!(
            f_average_direct(x, &t, &shifts).unwrap(),
            f_average_divisor_sum(x, &t, &shifts).unwrap()
        );
    }
}
