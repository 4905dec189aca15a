//! The centred divisibility indicators `f_p(n)` and their multiplicative
//! extension `f_m(n) = Π f_p(n)^α`, with exact rational arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::primes::PrimeWindow;

/// Largest prime window [`expansion_check`] will enumerate.
pub const MAX_EXPANSION_PRIMES: usize = 8;

/// `n = Π p^α`, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factored {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

pub fn factorize(n: u64) -> Factored {
    let mut factors = Vec::new();
    let mut rest = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= rest {
        if rest.is_multiple_of(d) {
            let mut alpha = 0;
            while rest.is_multiple_of(d) {
                rest /= d;
                alpha += 1;
            }
            factors.push((d, alpha));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Factored { n, factors }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).factors == [(n, 1)]
}

impl Factored {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("entries must be positive"));
        }
        Ok(factorize(n))
    }

    /// Product of the distinct primes.
    pub fn squarefree_part(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    /// Ω: prime factors with multiplicity.
    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, a)| a).sum()
    }

    /// τ of the squarefree part, i.e. `2^ω`.
    pub fn squarefree_divisor_count(&self) -> u64 {
        1u64 << self.factors.len()
    }

    /// Every prime divides at least twice (vacuously true for 1).
    pub fn is_square_full(&self) -> bool {
        self.factors.iter().all(|&(_, a)| a >= 2)
    }

    /// `a·f_a(n)`, an integer: `Π (p−1 or −1)^α`.
    fn scaled_f(&self, n: u64) -> Option<i128> {
        self.factors.iter().try_fold(1i128, |acc, &(p, alpha)| {
            let base: i128 = if n.is_multiple_of(p) {
                p as i128 - 1
            } else {
                -1
            };
            acc.checked_mul(base.checked_pow(alpha)?)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredTuple {
    pub entries: Vec<Factored>,
    pub pairwise_coprime: bool,
}

impl FactoredTuple {
    pub fn new(values: &[u64]) -> Result<Self> {
        let entries = values
            .iter()
            .map(|&v| Factored::new(v))
            .collect::<Result<Vec<_>>>()?;
        let pairwise_coprime = values
            .iter()
            .enumerate()
            .all(|(i, a)| values[i + 1..].iter().all(|b| a.gcd(b) == 1));
        Ok(Self {
            entries,
            pairwise_coprime,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.n).collect()
    }

    pub fn squarefree_parts(&self) -> Vec<u64> {
        self.entries.iter().map(Factored::squarefree_part).collect()
    }

    /// `Π τ(Aᵢ)²`.
    pub fn tau_squared_product(&self) -> u64 {
        self.entries
            .iter()
            .map(|e| e.squarefree_divisor_count().pow(2))
            .product()
    }

    fn require_coprime(&self) -> Result<()> {
        if self.pairwise_coprime {
            Ok(())
        } else {
            Err(Error::NotCoprime)
        }
    }
}

fn ratio(n: i128, d: i128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `f_p(n)`: `1 − 1/p` if `p | n`, else `−1/p`.
pub fn f_p(n: u64, p: u64) -> Result<BigRational> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let p = p as i128;
    Ok(if n as i128 % p == 0 {
        ratio(p - 1, p)
    } else {
        ratio(-1, p)
    })
}

/// `f_m(n) = Π f_p(n)^α` over `p^α ∥ m`.
pub fn f_m(n: u64, m: &Factored) -> BigRational {
    m.factors
        .iter()
        .fold(BigRational::one(), |acc, &(p, alpha)| {
            let p = p as i128;
            let base = if n as i128 % p == 0 {
                ratio(p - 1, p)
            } else {
                ratio(-1, p)
            };
            acc * num_traits::pow(base, alpha as usize)
        })
}

/// `E[f_p^α]` under independent divisibility with probability `1/p`:
/// `(1/p)(1−1/p)^α + (−1/p)^α(1−1/p)`.
fn prime_power_mean(p: u64, alpha: u32) -> BigRational {
    let p = BigInt::from(p);
    let inv = BigRational::new(BigInt::one(), p.clone());
    let keep = BigRational::one() - &inv;
    let neg = -inv.clone();
    &inv * num_traits::pow(keep.clone(), alpha as usize)
        + num_traits::pow(neg, alpha as usize) * keep
}

/// Main term of `(1/x) Σ_{n≤x} Πᵢ f_{aᵢ}(n+bᵢ)` for pairwise coprime aᵢ.
pub fn correlation_main_term(tuple: &FactoredTuple) -> Result<BigRational> {
    tuple.require_coprime()?;
    Ok(tuple
        .entries
        .iter()
        .flat_map(|e| e.factors.iter())
        .fold(BigRational::one(), |acc, &(p, a)| {
            acc * prime_power_mean(p, a)
        }))
}

fn check_shifts(tuple: &FactoredTuple, shifts: &[u64]) -> Result<()> {
    if shifts.len() != tuple.len() || shifts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidShifts);
    }
    Ok(())
}

/// `(1/x) Σ_{n≤x} Πᵢ f_{aᵢ}(n+bᵢ)` by direct summation.
pub fn f_average_direct(x: u64, tuple: &FactoredTuple, shifts: &[u64]) -> Result<BigRational> {
    check_shifts(tuple, shifts)?;
    if x == 0 {
        return Err(Error::InvalidParameter("x must be positive"));
    }
    let denom = tuple
        .entries
        .iter()
        .try_fold(1i128, |acc, e| acc.checked_mul(e.n as i128))
        .ok_or(Error::Overflow("f-average denominator"))?;
    let denom = BigInt::from(denom) * BigInt::from(x);

    let mut fast: i128 = 0;
    let mut slow = BigInt::zero();
    for n in 1..=x {
        let term = tuple
            .entries
            .iter()
            .zip(shifts)
            .try_fold(1i128, |acc, (e, &b)| acc.checked_mul(e.scaled_f(n + b)?));
        match term.and_then(|t| fast.checked_add(t)) {
            Some(v) => fast = v,
            None => {
                slow += BigInt::from(fast);
                fast = 0;
                slow += tuple
                    .entries
                    .iter()
                    .zip(shifts)
                    .fold(BigInt::one(), |acc, (e, &b)| {
                        acc * (f_m(n + b, e) * BigInt::from(e.n)).to_integer()
                    });
            }
        }
    }
    slow += BigInt::from(fast);
    Ok(BigRational::new(slow, denom))
}

/// `#{n ∈ [1, x] : n ≡ r (mod m)}`.
fn count_residue(x: u64, r: u128, m: u128) -> u128 {
    let first = if r.is_multiple_of(m) { m } else { r % m };
    if first > x as u128 {
        0
    } else {
        (x as u128 - first) / m + 1
    }
}

/// Merges `n ≡ r₁ (m₁)` with `n ≡ r₂ (m₂)`; `None` when incompatible.
fn crt(r1: u128, m1: u128, r2: u128, m2: u128) -> Option<Option<(u128, u128)>> {
    let (m1s, m2s) = (i128::try_from(m1).ok()?, i128::try_from(m2).ok()?);
    let ext = m1s.extended_gcd(&m2s);
    let g = ext.gcd;
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2s);
    if diff % g != 0 {
        return Some(None);
    }
    // m1·k ≡ diff (mod m2), solved modulo m2/g
    let step = m2s / g;
    let k = (diff / g % step).checked_mul(ext.x.rem_euclid(step))? % step;
    let lcm = (m1 / g as u128).checked_mul(m2)?;
    let r = (r1 as i128 + m1s.checked_mul(k)?).rem_euclid(i128::try_from(lcm).ok()?) as u128;
    Some(Some((r, lcm)))
}

/// Same average through the divisor-sum grouping
/// `(1/x) Σ_{dᵢ|Aᵢ} Σ_{eᵢ|Aᵢ/dᵢ} #{n ≤ x : eᵢdᵢ | n+bᵢ} Π μ(eᵢ) f_{aᵢ}(dᵢ)`.
pub fn f_average_divisor_sum(x: u64, tuple: &FactoredTuple, shifts: &[u64]) -> Result<BigRational> {
    check_shifts(tuple, shifts)?;
    if x == 0 {
        return Err(Error::InvalidParameter("x must be positive"));
    }
    // per entry: (modulus d·e, scaled weight μ(e)·a·f_a(d))
    let mut options: Vec<Vec<(u128, i128)>> = Vec::with_capacity(tuple.len());
    for e in &tuple.entries {
        let k = e.factors.len();
        let mut opts = Vec::with_capacity(3usize.pow(k as u32));
        let mut digits = vec![0u8; k];
        loop {
            let mut modulus: u128 = 1;
            let mut weight: i128 = 1;
            for (&(p, alpha), &dg) in e.factors.iter().zip(&digits) {
                let base: i128 = match dg {
                    // p | d
                    1 => {
                        modulus *= p as u128;
                        p as i128 - 1
                    }
                    // p | e: contributes μ = −1, and f_p(d) = −1/p
                    2 => {
                        modulus *= p as u128;
                        weight = -weight;
                        -1
                    }
                    _ => -1,
                };
                weight = base
                    .checked_pow(alpha)
                    .and_then(|b| weight.checked_mul(b))
                    .ok_or(Error::Overflow("divisor-sum weight"))?;
            }
            opts.push((modulus, weight));
            // next ternary digit vector
            let mut i = 0;
            while i < k && digits[i] == 2 {
                digits[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
            digits[i] += 1;
        }
        options.push(opts);
    }

    let mut total = BigInt::zero();
    let mut idx = vec![0usize; tuple.len()];
    'outer: loop {
        let mut residue: Option<(u128, u128)> = Some((0, 1));
        let mut weight = BigInt::one();
        for (i, &j) in idx.iter().enumerate() {
            let (m, w) = options[i][j];
            weight *= BigInt::from(w);
            let r = (m - (shifts[i] as u128 % m)) % m;
            residue = match residue {
                Some((r0, m0)) => crt(r0, m0, r, m).ok_or(Error::Overflow("CRT modulus"))?,
                None => None,
            };
        }
        if let Some((r, m)) = residue {
            total += weight * BigInt::from(count_residue(x, r, m));
        }
        for i in 0..idx.len() {
            idx[i] += 1;
            if idx[i] < options[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    let denom = tuple
        .entries
        .iter()
        .fold(BigInt::from(x), |acc, e| acc * BigInt::from(e.n));
    Ok(BigRational::new(total, denom))
}

/// Direct summation up to `10⁷`, divisor sums beyond.
pub fn empirical_f_average(x: u64, tuple: &FactoredTuple, shifts: &[u64]) -> Result<BigRational> {
    if x <= 10_000_000 {
        f_average_direct(x, tuple, shifts)
    } else {
        f_average_divisor_sum(x, tuple, shifts)
    }
}

/// `a + bi` with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        use num_traits::ToPrimitive;
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// `K = Πᵢ Π_{p^α∥aᵢ} i^α/α!` for a pairwise coprime tuple.
pub fn k_coefficient(tuple: &FactoredTuple) -> Result<GaussianRational> {
    tuple.require_coprime()?;
    let mut quarter_turns = 0u32;
    let mut denom = BigInt::one();
    for &(_, alpha) in tuple.entries.iter().flat_map(|e| e.factors.iter()) {
        quarter_turns += alpha;
        for k in 2..=alpha {
            denom *= BigInt::from(k);
        }
    }
    let mag = BigRational::new(BigInt::one(), denom);
    let zero = BigRational::zero();
    let (re, im) = match quarter_turns % 4 {
        0 => (mag, zero),
        1 => (zero, mag),
        2 => (-mag, zero),
        _ => (zero, -mag),
    };
    Ok(GaussianRational { re, im })
}

/// Single-shift product expansion against its truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCheck {
    /// `Π_p exp(it·f_p(n))`.
    pub lhs: Complex64,
    /// `Σ_{Ω(a) ≤ max_order} K_a t^{Ω(a)} f_a(n)` over a supported on the window.
    pub rhs: Complex64,
    /// `Σ_{k > max_order} (|t|·#primes)^k / k!`.
    pub tail_bound: f64,
    pub residual: f64,
    /// Rounding allowance on top of `tail_bound`.
    pub rounding: f64,
}

impl ExpansionCheck {
    pub fn within_tail(&self) -> bool {
        self.residual <= self.tail_bound + self.rounding
    }
}

fn poisson_tail(rate: f64, max_order: u32) -> f64 {
    let mut term = 1.0;
    let mut k = 0u32;
    let mut tail = 0.0;
    loop {
        k += 1;
        term *= rate / k as f64;
        if k > max_order {
            tail += term;
            if (k as f64 > rate && term <= 1e-18 * tail) || term == 0.0 {
                return tail;
            }
        }
    }
}

pub fn expansion_check(
    n: u64,
    window: &PrimeWindow,
    t: f64,
    max_order: u32,
) -> Result<ExpansionCheck> {
    let primes = window.primes();
    if primes.len() > MAX_EXPANSION_PRIMES {
        return Err(Error::WindowTooLarge {
            primes: primes.len(),
            max: MAX_EXPANSION_PRIMES,
        });
    }
    let fp: Vec<f64> = primes
        .iter()
        .map(|&p| {
            if n.is_multiple_of(p) {
                1.0 - 1.0 / p as f64
            } else {
                -1.0 / p as f64
            }
        })
        .collect();
    let lhs = fp.iter().fold(Complex64::new(1.0, 0.0), |acc, &f| {
        acc * Complex64::new(0.0, t * f).exp()
    });

    // Σ over exponent vectors with total order ≤ max_order of Π (itf_p)^α/α!
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let mut alphas = vec![0u32; fp.len()];
    loop {
        let term = fp
            .iter()
            .zip(&alphas)
            .fold(Complex64::new(1.0, 0.0), |acc, (&f, &a)| {
                let mut z = Complex64::new(1.0, 0.0);
                for k in 1..=a {
                    z *= Complex64::new(0.0, t * f) / k as f64;
                }
                acc * z
            });
        rhs += term;
        abs_sum += term.norm();
        // advance with total order capped
        let mut i = 0;
        loop {
            if i == alphas.len() {
                let residual = (lhs - rhs).norm();
                return Ok(ExpansionCheck {
                    lhs,
                    rhs,
                    tail_bound: poisson_tail(libm::fabs(t) * fp.len() as f64, max_order),
                    residual,
                    rounding: 64.0 * f64::EPSILON * (abs_sum + 1.0),
                });
            }
            alphas[i] += 1;
            if alphas.iter().sum::<u32>() <= max_order {
                break;
            }
            alphas[i] = 0;
            i += 1;
        }
    }
}

/// Direct average for a tuple sharing the prime q, beside the same average
/// with q removed from every entry and scaled by `1/q²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedPrimeReport {
    pub q: u64,
    pub average: BigRational,
    pub reduced_average: BigRational,
    /// `reduced_average / q²`.
    pub predicted_scale: BigRational,
}

pub fn shared_prime_report(
    x: u64,
    values: &[u64],
    shifts: &[u64],
    q: u64,
) -> Result<SharedPrimeReport> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if values.iter().filter(|&&a| a % q == 0).count() < 2 {
        return Err(Error::InvalidParameter(
            "q must divide at least two entries",
        ));
    }
    let tuple = FactoredTuple::new(values)?;
    let reduced: Vec<u64> = values
        .iter()
        .map(|&a| {
            let mut a = a;
            while a % q == 0 {
                a /= q;
            }
            a
        })
        .collect();
    let reduced_tuple = FactoredTuple::new(&reduced)?;
    let average = f_average_direct(x, &tuple, shifts)?;
    let reduced_average = f_average_direct(x, &reduced_tuple, shifts)?;
    let q2 = BigInt::from(q) * BigInt::from(q);
    let predicted_scale = &reduced_average / BigRational::from_integer(q2);
    Ok(SharedPrimeReport {
        q,
        average,
        reduced_average,
        predicted_scale,
    })
}

/// `|a − b|` as `f64`, for tolerance checks on exact values.
pub fn abs_diff_f64(a: &BigRational, b: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    (a - b).abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn f_p_examples() {
        assert_eq!(f_p(6, 3).unwrap(), q(2, 3));
        assert_eq!(f_p(7, 3).unwrap(), q(-1, 3));
        for n in (1..100).step_by(2) {
            assert_eq!(f_p(n, 2).unwrap(), q(-1, 2));
        }
        assert_eq!(f_p(6, 4), Err(Error::NotPrime(4)));
    }

    #[test]
    fn f_m_examples() {
        for n in 1..20 {
            assert_eq!(f_m(n, &factorize(1)), BigRational::one());
        }
        assert_eq!(f_m(6, &factorize(4)), q(1, 4));
        assert_eq!(f_m(10, &factorize(12)), q(-1, 12));
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
        for a in [2u64, 6, 12, 18, 20, 45] {
            let t = FactoredTuple::new(&[a]).unwrap();
            assert!(correlation_main_term(&t).unwrap().is_zero(), "a={a}");
        }
        let t = FactoredTuple::new(&[4, 6]).unwrap();
        assert_eq!(correlation_main_term(&t), Err(Error::NotCoprime));
    }

    #[test]
    fn average_of_one_is_one() {
        let t = FactoredTuple::new(&[1]).unwrap();
        for x in [1u64, 7, 1000] {
            assert_eq!(f_average_direct(x, &t, &[0]).unwrap(), BigRational::one());
        }
    }

    #[test]
    fn single_prime_closed_form() {
        let t = FactoredTuple::new(&[7]).unwrap();
        for x in [1u64, 6, 7, 50, 1234] {
            let expected = q((x / 7) as i64, x as i64) - q(1, 7);
            assert_eq!(f_average_direct(x, &t, &[0]).unwrap(), expected);
            assert_eq!(f_average_divisor_sum(x, &t, &[0]).unwrap(), expected);
        }
    }

    #[test]
    fn k_examples() {
        let one = k_coefficient(&FactoredTuple::new(&[1]).unwrap()).unwrap();
        assert_eq!(one.re, BigRational::one());
        let k4 = k_coefficient(&FactoredTuple::new(&[4]).unwrap()).unwrap();
        assert_eq!((k4.re, k4.im), (q(-1, 2), BigRational::zero()));
        let k12 = k_coefficient(&FactoredTuple::new(&[12]).unwrap()).unwrap();
        assert_eq!(
            (k12.re.clone(), k12.im.clone()),
            (BigRational::zero(), q(-1, 2))
        );
        assert!(k12.norm_sqr() <= BigRational::one());
        assert_eq!(
            k_coefficient(&FactoredTuple::new(&[4, 10]).unwrap()),
            Err(Error::NotCoprime)
        );
    }

    #[test]
    fn expansion_examples() {
        let w = PrimeWindow::new(10.0, 14.0).unwrap();
        let c = expansion_check(143, &w, 0.0, 3).unwrap();
        assert_eq!(c.lhs, Complex64::new(1.0, 0.0));
        assert_eq!(c.rhs, Complex64::new(1.0, 0.0));
        let c = expansion_check(143, &w, 0.1, 12).unwrap();
        assert!(c.residual <= 1e-10 && c.within_tail());
        let single = PrimeWindow::new(10.0, 12.0).unwrap();
        for order in 0..8 {
            let c = expansion_check(11, &single, 1.3, order).unwrap();
            let expected = Complex64::new(0.0, 1.3 * 10.0 / 11.0).exp();
            assert!((c.lhs - expected).norm() < 1e-15);
            assert!(c.within_tail(), "order {order}");
        }
        let big = PrimeWindow::new(1.0, 30.0).unwrap();
        assert!(matches!(
            expansion_check(1, &big, 0.1, 2),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn crt_merges() {
        assert_eq!(crt(2, 4, 1, 9).unwrap(), Some((10, 36)));
        assert_eq!(crt(1, 4, 0, 6).unwrap(), None);
        assert_eq!(crt(1, 4, 3, 6).unwrap(), Some((9, 12)));
    }
}
