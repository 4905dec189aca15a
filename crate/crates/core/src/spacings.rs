//! Nearest-neighbour spacing statistics of the rescaled δ-normal sequence
//! and the Poisson references they are compared against.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::normality::{normal_flags, NormalSequence, NormalityContext};
use crate::omega::OmegaTable;
use crate::primes::primes_up_to;
use crate::sum::NeumaierSum;

/// `Ñᵢ = Nᵢ / s`.
pub fn rescale(seq: &NormalSequence) -> Result<Vec<f64>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let s = seq.context.rescale;
    Ok(seq.values.iter().map(|&n| n as f64 / s).collect())
}

/// Rescaled sequence with its spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingStats {
    pub rescale: f64,
    pub rescaled: Vec<f64>,
    /// `Dᵢ = Ñᵢ₊₁ − Ñᵢ`.
    pub spacings: Vec<f64>,
    /// Integer gaps `Nᵢ₊₁ − Nᵢ`; these telescope exactly.
    pub gaps: Vec<u64>,
}

impl SpacingStats {
    pub fn new(seq: &NormalSequence) -> Result<Self> {
        let rescaled = rescale(seq)?;
        let spacings = rescaled.windows(2).map(|w| w[1] - w[0]).collect();
        let gaps = seq.values.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            rescale: seq.context.rescale,
            rescaled,
            spacings,
            gaps,
        })
    }

    pub fn mean_spacing(&self) -> Option<f64> {
        if self.spacings.is_empty() {
            return None;
        }
        let s: NeumaierSum = self.spacings.iter().copied().collect();
        Some(s.value() / self.spacings.len() as f64)
    }

    /// Default `i_max = min(x, available spacings)`.
    pub fn default_i_max(&self, x: f64) -> usize {
        let cap = if x >= usize::MAX as f64 {
            usize::MAX
        } else {
            x as usize
        };
        self.spacings.len().min(cap)
    }

    pub fn survival(&self, lambda: f64, i_max: usize) -> Result<f64> {
        survival_of(&self.spacings, lambda, i_max)
    }

    pub fn survival_curve(&self, lambdas: &[f64], i_max: usize) -> Result<Vec<SurvivalRow>> {
        lambdas
            .iter()
            .map(|&lambda| {
                let survival = self.survival(lambda, i_max)?;
                let expected = libm::exp(-lambda);
                Ok(SurvivalRow {
                    lambda,
                    survival,
                    expected,
                    abs_err: libm::fabs(survival - expected),
                })
            })
            .collect()
    }
}

fn survival_of(spacings: &[f64], lambda: f64, i_max: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive"));
    }
    if i_max == 0 || spacings.len() < i_max {
        return Err(Error::InsufficientData {
            needed: i_max.max(1),
            available: spacings.len(),
        });
    }
    let hits = spacings[..i_max].iter().filter(|&&d| d > lambda).count();
    Ok(hits as f64 / i_max as f64)
}

/// `(1/i_max)·#{i ≤ i_max : Ñᵢ₊₁ − Ñᵢ > λ}`, strict inequality.
pub fn spacing_survival(rescaled: &[f64], lambda: f64, i_max: usize) -> Result<f64> {
    let spacings: Vec<f64> = rescaled.windows(2).map(|w| w[1] - w[0]).collect();
    survival_of(&spacings, lambda, i_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalRow {
    pub lambda: f64,
    pub survival: f64,
    pub expected: f64,
    pub abs_err: f64,
}

/// Empirical m-th moment of the window counts `𝒩(N+L) − 𝒩(N)`, with
/// half-open windows `(N, N+L]` and `L = λ·s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMoment {
    pub m: u32,
    pub lambda: f64,
    pub window_len: f64,
    /// `⌊L⌋`: the integer reach of each window.
    pub reach: u64,
    /// `⌊x·s⌋`: windows start at δ-normal `N ≤ limit`.
    pub limit: u64,
    pub x: f64,
    /// `Σ_N (𝒩(N+L) − 𝒩(N))^m`, exact.
    pub power_sum: u128,
}

impl WindowMoment {
    pub fn value(&self) -> f64 {
        self.power_sum as f64 / self.x
    }
}

fn window_geometry(ctx: &NormalityContext, lambda: f64) -> Result<(f64, u64, u64)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive"));
    }
    let len = lambda * ctx.rescale;
    Ok((len, libm::floor(len) as u64, ctx.enumeration_limit()))
}

/// Streams over the sequence with two pointers.
pub fn window_count_moment(
    ctx: &NormalityContext,
    seq: &NormalSequence,
    m: u32,
    lambda: f64,
) -> Result<WindowMoment> {
    if m == 0 {
        return Err(Error::InvalidParameter("moment order must be at least 1"));
    }
    let (window_len, reach, limit) = window_geometry(ctx, lambda)?;
    if seq.limit < limit + reach {
        return Err(Error::Coverage {
            need_lo: 1,
            need_hi: limit + reach + 1,
            have_lo: 1,
            have_hi: seq.limit + 1,
        });
    }
    let v = &seq.values;
    let mut power_sum: u128 = 0;
    let mut end = 0usize;
    for (i, &n) in v.iter().enumerate() {
        if n > limit {
            break;
        }
        end = end.max(i + 1);
        while end < v.len() && v[end] <= n + reach {
            end += 1;
        }
        let c = (end - i - 1) as u128;
        power_sum = c
            .checked_pow(m)
            .and_then(|p| power_sum.checked_add(p))
            .ok_or(Error::Overflow("window moment"))?;
    }
    Ok(WindowMoment {
        m,
        lambda,
        window_len,
        reach,
        limit,
        x: ctx.x,
        power_sum,
    })
}

/// The same power sum via correlated counts:
/// `Σ_r σ(m,r) Σ_{1≤b₁<…<b_r≤L} N_{0,b₁,…,b_r}(x·s)`.
pub fn window_moment_via_correlations(
    ctx: &NormalityContext,
    table: &OmegaTable,
    m: u32,
    lambda: f64,
) -> Result<WindowMoment> {
    if m == 0 {
        return Err(Error::InvalidParameter("moment order must be at least 1"));
    }
    let (window_len, reach, limit) = window_geometry(ctx, lambda)?;
    if reach > 24 {
        return Err(Error::InvalidParameter(
            "window reach too large to enumerate shift sets",
        ));
    }
    let flags = if limit == 0 {
        Vec::new()
    } else {
        normal_flags(ctx, table, 1, limit + reach)?
    };
    let mut power_sum: u128 = 0;
    let mut shifts = Vec::new();
    for subset in 1u32..(1u32 << reach) {
        let r = subset.count_ones();
        if r > m {
            continue;
        }
        shifts.clear();
        shifts.extend(
            (0..reach)
                .filter(|b| subset >> b & 1 == 1)
                .map(|b| b as usize + 1),
        );
        let count = (0..limit as usize)
            .filter(|&i| flags[i] && shifts.iter().all(|&b| flags[i + b]))
            .count() as u128;
        let sigma = surjection_count(m, r)? as u128;
        power_sum = sigma
            .checked_mul(count)
            .and_then(|t| power_sum.checked_add(t))
            .ok_or(Error::Overflow("window moment"))?;
    }
    Ok(WindowMoment {
        m,
        lambda,
        window_len,
        reach,
        limit,
        x: ctx.x,
        power_sum,
    })
}

/// `σ(m,r) = Σ_{j=0}^{r} (−1)^j C(r,j) (r−j)^m`, exact.
pub fn surjection_count_big(m: u32, r: u32) -> BigUint {
    let mut total = BigInt::zero();
    let mut binom = BigInt::one();
    for j in 0..=r {
        let term = &binom * BigInt::from(r - j).pow(m);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        binom = binom * BigInt::from(r - j) / BigInt::from(j + 1);
    }
    total
        .to_biguint()
        .expect("surjection counts are nonnegative")
}

/// Number of surjections from an m-set onto an r-set; errors if it does
/// not fit in 64 bits.
pub fn surjection_count(m: u32, r: u32) -> Result<u64> {
    if r > m {
        return Ok((m == 0 && r == 0) as u64);
    }
    surjection_count_big(m, r)
        .to_u64()
        .ok_or(Error::Overflow("surjection count"))
}

/// The m-th Poisson(λ) moment by two routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonMoment {
    pub m: u32,
    pub lambda: f64,
    /// `Σ_{r≤m} σ(m,r) λ^r / r!`.
    pub surjection_sum: f64,
    /// `Σ_j j^m e^{−λ} λ^j / j!`.
    pub series_sum: f64,
}

impl PoissonMoment {
    pub fn relative_gap(&self) -> f64 {
        libm::fabs(self.surjection_sum - self.series_sum)
            / libm::fabs(self.series_sum).max(f64::MIN_POSITIVE)
    }
}

pub fn poisson_moment(m: u32, lambda: f64) -> Result<PoissonMoment> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive"));
    }
    let mut surj = NeumaierSum::new();
    // λ^r / r!
    let mut weight = 1.0;
    for r in 0..=m {
        if r > 0 {
            weight *= lambda / r as f64;
        }
        let sigma = surjection_count_big(m, r)
            .to_f64()
            .ok_or(Error::Overflow("surjection count as float"))?;
        if sigma != 0.0 {
            surj.add(sigma * weight);
        }
    }

    let mut series = NeumaierSum::new();
    let mut w = libm::exp(-lambda);
    let mut prev = f64::INFINITY;
    let mut j = 0u32;
    loop {
        let term = libm::pow(j as f64, m as f64) * w;
        series.add(term);
        let decreasing = term <= prev && j as f64 > lambda;
        if decreasing && term < 1e-15 * series.value() {
            break;
        }
        prev = term;
        j += 1;
        w *= lambda / j as f64;
        if j > 100_000 {
            return Err(Error::InvalidParameter("Poisson series failed to converge"));
        }
    }
    Ok(PoissonMoment {
        m,
        lambda,
        surjection_sum: surj.value(),
        series_sum: series.value(),
    })
}

/// Monte Carlo versus exact `P(Dᵢ > λ)` for n uniform points on `[0, n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBaseline {
    pub n: u64,
    pub lambda: f64,
    pub trials: u64,
    pub seed: u64,
    /// `((n−λ)/n)^n`.
    pub exact: f64,
    pub empirical: f64,
    /// Binomial standard error `√(p(1−p)/(trials·(n+1)))` at the exact p.
    pub std_err: f64,
}

pub fn uniform_baseline(n: u64, lambda: f64, trials: u64, seed: u64) -> Result<UniformBaseline> {
    if n == 0 || !(lambda > 0.0) || lambda >= n as f64 {
        return Err(Error::InvalidParameter("need 0 < lambda < n"));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial"));
    }
    let nf = n as f64;
    let exact = libm::pow((nf - lambda) / nf, nf);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n as usize);
    let mut hits: u64 = 0;
    for _ in 0..trials {
        pts.clear();
        pts.extend((0..n).map(|_| rng.gen::<f64>() * nf));
        pts.sort_unstable_by(f64::total_cmp);
        let mut prev = 0.0;
        for &y in pts.iter().chain(core::iter::once(&nf)) {
            hits += (y - prev > lambda) as u64;
            prev = y;
        }
    }
    let gaps = trials * (n + 1);
    Ok(UniformBaseline {
        n,
        lambda,
        trials,
        seed,
        exact,
        empirical: hits as f64 / gaps as f64,
        std_err: libm::sqrt(exact * (1.0 - exact) / gaps as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeSpacingSurvival {
    pub x: u64,
    pub lambda: f64,
    pub gaps: u64,
    pub survival: f64,
    pub expected: f64,
}

/// Fraction of consecutive primes `p < p' ≤ x` with `(p' − p)/ln x > λ`.
pub fn prime_spacing_survival(x: u64, lambda: f64) -> Result<PrimeSpacingSurvival> {
    if x < 3 {
        return Err(Error::InvalidParameter("need at least two primes up to x"));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("lambda must be positive"));
    }
    let primes = primes_up_to(x);
    let log_x = libm::log(x as f64);
    let hits = primes
        .windows(2)
        .filter(|w| (w[1] - w[0]) as f64 / log_x > lambda)
        .count();
    let gaps = primes.len() as u64 - 1;
    Ok(PrimeSpacingSurvival {
        x,
        lambda,
        gaps,
        survival: hits as f64 / gaps as f64,
        expected: libm::exp(-lambda),
    })
}
