//! Prime generation and prime windows.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Default number of integers handled per sieve segment.
pub const DEFAULT_SEGMENT: usize = 1 << 22;

/// Limits on what a single sieve call may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveBudget {
    /// Exclusive upper bound on any sieved integer.
    pub max_bound: u64,
    /// Largest `hi - lo` a single call may materialize.
    pub max_span: u64,
}

impl Default for SieveBudget {
    fn default() -> Self {
        Self {
            max_bound: 1 << 40,
            max_span: 1 << 33,
        }
    }
}

impl SieveBudget {
    pub fn check(&self, lo: u64, hi: u64) -> Result<()> {
        if hi > self.max_bound || hi - lo > self.max_span {
            return Err(Error::RangeTooLarge {
                lo,
                hi,
                max_bound: self.max_bound,
                max_span: self.max_span,
            });
        }
        Ok(())
    }
}

/// `⌊√n⌋` computed exactly for all `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = libm::sqrt(n as f64) as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// All primes `p ≤ limit` by a plain odd-only sieve. Used for base primes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    // index i represents 2i + 1
    let half = limit / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(half / 4 + 1);
    out.push(2);
    out.extend(
        (1..half)
            .filter(|&i| !composite[i] && 2 * i < limit)
            .map(|i| (2 * i + 1) as u64),
    );
    out
}

/// Marks primes in `[lo, hi)` given every prime up to `√(hi-1)`.
/// `flags[i]` is true when `lo + i` is prime.
pub(crate) fn sieve_segment_primality(lo: u64, hi: u64, base: &[u64], flags: &mut Vec<bool>) {
    let len = (hi - lo) as usize;
    flags.clear();
    flags.resize(len, true);
    for n in lo..hi.min(2) {
        flags[(n - lo) as usize] = false;
    }
    for &p in base {
        let p2 = p * p;
        if p2 >= hi {
            break;
        }
        let first = if p2 >= lo { p2 } else { lo.div_ceil(p) * p };
        let mut j = (first - lo) as usize;
        while j < len {
            flags[j] = false;
            j += p as usize;
        }
    }
}

/// Exactly the primes in `[lo, hi)`, ascending, sieved segment by segment.
pub fn primes_in(lo: u64, hi: u64) -> Result<Vec<u64>> {
    primes_in_with(lo, hi, &SieveBudget::default())
}

pub fn primes_in_with(lo: u64, hi: u64, budget: &SieveBudget) -> Result<Vec<u64>> {
    if lo < 2 || hi <= lo {
        return Err(Error::InvalidRange { lo, hi, min: 2 });
    }
    budget.check(lo, hi)?;
    let base = primes_up_to(isqrt(hi - 1));
    let mut out = Vec::new();
    let mut flags = Vec::new();
    let mut seg_lo = lo;
    while seg_lo < hi {
        let seg_hi = hi.min(seg_lo.saturating_add(DEFAULT_SEGMENT as u64));
        sieve_segment_primality(seg_lo, seg_hi, &base, &mut flags);
        out.extend(
            flags
                .iter()
                .enumerate()
                .filter(|(_, &is_p)| is_p)
                .map(|(i, _)| seg_lo + i as u64),
        );
        seg_lo = seg_hi;
    }
    Ok(out)
}

/// Smallest integer strictly greater than the real `y` (and at least 2).
fn first_integer_above(y: f64) -> u64 {
    if y < 2.0 {
        return 2;
    }
    let f = libm::floor(y) as u64;
    f + 1
}

/// Largest integer strictly less than the real `z`, plus one (exclusive end).
fn end_integer_below(z: f64) -> u64 {
    let c = libm::ceil(z);
    if c <= 0.0 {
        0
    } else {
        c as u64
    }
}

/// Primes `p` with `y < p < z` and their reciprocal sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeWindow {
    y: f64,
    z: f64,
    primes: Vec<u64>,
    reciprocal_sum: f64,
}

impl PrimeWindow {
    pub fn new(y: f64, z: f64) -> Result<Self> {
        Self::with_budget(y, z, &SieveBudget::default())
    }

    pub fn with_budget(y: f64, z: f64, budget: &SieveBudget) -> Result<Self> {
        if !(y < z) || y.is_nan() || !z.is_finite() {
            return Err(Error::InvalidWindow { y, z });
        }
        let lo = first_integer_above(y);
        let hi = end_integer_below(z);
        let primes = if hi > lo {
            primes_in_with(lo, hi, budget)?
        } else {
            Vec::new()
        };
        let reciprocal_sum = reciprocal_sum_ascending(&primes);
        Ok(Self {
            y,
            z,
            primes,
            reciprocal_sum,
        })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// `S = Σ_{y<p<z} 1/p`; zero for an empty window.
    pub fn reciprocal_sum(&self) -> f64 {
        self.reciprocal_sum
    }

    /// `S`, or an error when the window holds no primes.
    pub fn nonzero_sum(&self) -> Result<f64> {
        if self.primes.is_empty() {
            Err(Error::EmptyWindow {
                y: self.y,
                z: self.z,
            })
        } else {
            Ok(self.reciprocal_sum)
        }
    }

    pub fn bounds(&self) -> crate::omega::WindowBounds {
        crate::omega::WindowBounds {
            y: self.y,
            z: self.z,
        }
    }

    pub fn contains(&self, p: u64) -> bool {
        self.bounds().contains(p)
    }
}

/// Σ 1/p over the given primes in ascending order, compensated.
pub fn reciprocal_sum_ascending(primes: &[u64]) -> f64 {
    debug_assert!(primes.windows(2).all(|w| w[0] < w[1]));
    primes
        .iter()
        .map(|&p| 1.0 / p as f64)
        .collect::<NeumaierSum>()
        .value()
}

/// `Σ_{y<p<z} 1/p`, i.e. the window's stored sum.
pub fn prime_reciprocal_sum(window: &PrimeWindow) -> f64 {
    window.reciprocal_sum()
}
