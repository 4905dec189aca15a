//! Segmented sieve for ω(n) and the windowed count ω(n;y,z).
//!
//! Each segment keeps, per integer, the product of every prime power
//! found among the base primes (those up to `√(H-1)` for the global bound
//! `H`). Whatever is left over is 1 or a single prime above the base range,
//! so one comparison per integer finishes ω(n), and one division recovers
//! the leftover prime for the windowed count.

use alloc::vec::Vec;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::primes::{isqrt, primes_up_to, SieveBudget, DEFAULT_SEGMENT};

/// Real cutoffs of a prime window, compared strictly: `y < p < z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowBounds {
    pub y: f64,
    pub z: f64,
}

impl WindowBounds {
    pub fn new(y: f64, z: f64) -> Result<Self> {
        if !(y < z) {
            return Err(Error::InvalidWindow { y, z });
        }
        Ok(Self { y, z })
    }

    #[inline]
    pub fn contains(&self, p: u64) -> bool {
        let p = p as f64;
        self.y < p && p < self.z
    }
}

/// Base primes shared read-only by every segment below `bound`.
#[derive(Debug, Clone)]
pub struct OmegaSieve {
    bound: u64,
    base: Vec<u64>,
}

/// Per-segment scratch, reused between calls.
#[derive(Debug, Default)]
pub struct Scratch {
    prod: Vec<u64>,
}

/// ω counts for the integers of `[lo, hi)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OmegaSegment {
    pub lo: u64,
    pub hi: u64,
    pub full: Vec<u8>,
    /// Present only when the segment was sieved with a window.
    pub window: Option<Vec<u8>>,
}

impl OmegaSieve {
    /// Prepares base primes for sieving any integer below `bound`.
    pub fn new(bound: u64) -> Result<Self> {
        Self::with_budget(bound, &SieveBudget::default())
    }

    pub fn with_budget(bound: u64, budget: &SieveBudget) -> Result<Self> {
        if bound > budget.max_bound {
            return Err(Error::RangeTooLarge {
                lo: 0,
                hi: bound,
                max_bound: budget.max_bound,
                max_span: budget.max_span,
            });
        }
        let base = primes_up_to(isqrt(bound.saturating_sub(1)));
        Ok(Self { bound, base })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn base_primes(&self) -> &[u64] {
        &self.base
    }

    /// Sieves `[lo, hi)` into `out`. Requires `1 ≤ lo < hi ≤ bound`.
    pub fn sieve_segment(
        &self,
        lo: u64,
        hi: u64,
        window: Option<WindowBounds>,
        out: &mut OmegaSegment,
        scratch: &mut Scratch,
    ) -> Result<()> {
        let len = hi.saturating_sub(lo) as usize;
        out.lo = lo;
        out.hi = hi;
        out.full.clear();
        out.full.resize(len, 0);
        let mut win = window.map(|_| {
            let mut w = out.window.take().unwrap_or_default();
            w.clear();
            w.resize(len, 0);
            w
        });
        let res = self.sieve_into(lo, hi, window, &mut out.full, win.as_deref_mut(), scratch);
        out.window = win;
        res
    }

    /// Writes ω(n) for `n ∈ [lo, hi)` into `full` and, when a window is
    /// given, ω(n;y,z) into `windowed`. Both slices must hold `hi − lo`
    /// entries; their previous contents are overwritten.
    pub fn sieve_into(
        &self,
        lo: u64,
        hi: u64,
        window: Option<WindowBounds>,
        full: &mut [u8],
        mut windowed: Option<&mut [u8]>,
        scratch: &mut Scratch,
    ) -> Result<()> {
        if lo < 1 || hi <= lo {
            return Err(Error::InvalidRange { lo, hi, min: 1 });
        }
        if hi > self.bound {
            return Err(Error::Coverage {
                need_lo: lo,
                need_hi: hi,
                have_lo: 1,
                have_hi: self.bound,
            });
        }
        let len = (hi - lo) as usize;
        if full.len() != len
            || window.is_some() != windowed.is_some()
            || windowed.as_ref().is_some_and(|w| w.len() != len)
        {
            return Err(Error::InvalidParameter(
                "output slices do not match the segment",
            ));
        }
        full.fill(0);
        if let Some(w) = windowed.as_deref_mut() {
            w.fill(0);
        }
        let prod = &mut scratch.prod;
        prod.clear();
        prod.resize(len, 1);

        for &p in &self.base {
            if p >= hi {
                break;
            }
            let step = p as usize;
            let start = (lo.div_ceil(p) * p - lo) as usize;
            match (windowed.as_deref_mut(), window) {
                (Some(w), Some(b)) => {
                    let inc = b.contains(p) as u8;
                    let mut j = start;
                    while j < len {
                        full[j] += 1;
                        w[j] += inc;
                        prod[j] *= p;
                        j += step;
                    }
                }
                _ => {
                    let mut j = start;
                    while j < len {
                        full[j] += 1;
                        prod[j] *= p;
                        j += step;
                    }
                }
            }
            let mut pk = p * p;
            while pk < hi {
                let step = pk as usize;
                let mut j = (lo.div_ceil(pk) * pk - lo) as usize;
                while j < len {
                    prod[j] *= p;
                    j += step;
                }
                pk = match pk.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
        }

        match (windowed, window) {
            (Some(w), Some(b)) => {
                for (i, (&pr, f)) in prod.iter().zip(full.iter_mut()).enumerate() {
                    let n = lo + i as u64;
                    if pr != n {
                        *f += 1;
                        if b.contains(n / pr) {
                            w[i] += 1;
                        }
                    }
                }
            }
            _ => {
                for (i, (&pr, f)) in prod.iter().zip(full.iter_mut()).enumerate() {
                    *f += (pr != lo + i as u64) as u8;
                }
            }
        }
        Ok(())
    }

    /// Splits `[lo, hi)` into consecutive segments of `segment` integers.
    pub fn segment_bounds(lo: u64, hi: u64, segment: usize) -> impl Iterator<Item = (u64, u64)> {
        let step = segment.max(1) as u64;
        let count = if hi > lo { (hi - lo).div_ceil(step) } else { 0 };
        (0..count).map(move |k| {
            let a = lo + k * step;
            (a, hi.min(a + step))
        })
    }
}

/// Exact per-integer ω(n) (and optionally ω(n;y,z)) over `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaTable {
    lo: u64,
    hi: u64,
    full: Vec<u8>,
    windowed: Option<Vec<u8>>,
    window: Option<WindowBounds>,
}

impl OmegaTable {
    /// Assembles a table from raw counters. `windowed` must be present
    /// exactly when `window` is.
    pub fn from_parts(
        lo: u64,
        hi: u64,
        full: Vec<u8>,
        window: Option<WindowBounds>,
        windowed: Option<Vec<u8>>,
    ) -> Result<Self> {
        let len = hi
            .checked_sub(lo)
            .ok_or(Error::InvalidRange { lo, hi, min: 1 })? as usize;
        if full.len() != len
            || window.is_some() != windowed.is_some()
            || windowed.as_ref().is_some_and(|w| w.len() != len)
        {
            return Err(Error::InvalidParameter(
                "counter lengths do not match range",
            ));
        }
        Ok(Self {
            lo,
            hi,
            full,
            windowed,
            window,
        })
    }

    /// Concatenates consecutive segments covering `[lo, hi)`.
    pub fn from_segments<I>(
        lo: u64,
        hi: u64,
        window: Option<WindowBounds>,
        segments: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = OmegaSegment>,
    {
        let len = (hi - lo) as usize;
        let mut full = Vec::with_capacity(len);
        let mut windowed = window.map(|_| Vec::with_capacity(len));
        let mut next = lo;
        for seg in segments {
            if seg.lo != next {
                return Err(Error::InvalidParameter("segments are not contiguous"));
            }
            next = seg.hi;
            full.extend_from_slice(&seg.full);
            if let Some(w) = windowed.as_mut() {
                let sw = seg
                    .window
                    .as_ref()
                    .ok_or(Error::InvalidParameter("segment lacks windowed counts"))?;
                w.extend_from_slice(sw);
            }
        }
        if next != hi {
            return Err(Error::InvalidParameter(
                "segments do not reach the range end",
            ));
        }
        Self::from_parts(lo, hi, full, window, windowed)
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full.is_empty()
    }

    pub fn window(&self) -> Option<WindowBounds> {
        self.window
    }

    pub fn full_counts(&self) -> &[u8] {
        &self.full
    }

    /// Windowed counters; the full counters when no window was applied.
    pub fn window_counts(&self) -> &[u8] {
        self.windowed.as_deref().unwrap_or(&self.full)
    }

    pub fn has_window(&self) -> bool {
        self.windowed.is_some()
    }

    #[inline]
    pub fn omega(&self, n: u64) -> u8 {
        self.full[(n - self.lo) as usize]
    }

    #[inline]
    pub fn omega_window(&self, n: u64) -> u8 {
        self.window_counts()[(n - self.lo) as usize]
    }

    pub fn get(&self, n: u64) -> Option<u8> {
        (self.lo..self.hi).contains(&n).then(|| self.omega(n))
    }

    /// Errors unless the table covers the inclusive range `[a, b]`.
    pub fn require(&self, a: u64, b: u64) -> Result<()> {
        if a < self.lo || b >= self.hi {
            return Err(Error::Coverage {
                need_lo: a,
                need_hi: b.saturating_add(1),
                have_lo: self.lo,
                have_hi: self.hi,
            });
        }
        Ok(())
    }
}

/// Sequential table over `[lo, hi)` with the default segment size.
pub fn omega_table(lo: u64, hi: u64, window: Option<WindowBounds>) -> Result<OmegaTable> {
    omega_table_with(lo, hi, window, DEFAULT_SEGMENT, &SieveBudget::default())
}

pub fn omega_table_with(
    lo: u64,
    hi: u64,
    window: Option<WindowBounds>,
    segment: usize,
    budget: &SieveBudget,
) -> Result<OmegaTable> {
    if lo < 1 || hi <= lo {
        return Err(Error::InvalidRange { lo, hi, min: 1 });
    }
    budget.check(lo, hi)?;
    let sieve = OmegaSieve::with_budget(hi, budget)?;
    let mut scratch = Scratch::default();
    let mut segments = Vec::new();
    for (a, b) in OmegaSieve::segment_bounds(lo, hi, segment) {
        let mut seg = OmegaSegment::default();
        sieve.sieve_segment(a, b, window, &mut seg, &mut scratch)?;
        segments.push(seg);
    }
    OmegaTable::from_segments(lo, hi, window, segments)
}

/// Exact histogram of ω(n) over a range; merging is plain addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OmegaHistogram {
    pub counts: [u64; 16],
}

impl OmegaHistogram {
    pub fn add_counts(&mut self, full: &[u8]) {
        for &w in full {
            self.counts[w as usize] += 1;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn omega_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as u64 * c)
            .sum()
    }

    /// `(1/x) Σ (ω(n) − center)²`, with `x` the number of integers seen.
    pub fn mean_square_deviation(&self, center: f64) -> f64 {
        let x = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let d = k as f64 - center;
                c as f64 * d * d
            })
            .sum::<f64>()
            / x
    }

    /// Number of integers whose ω satisfies `pred`.
    pub fn count_where(&self, mut pred: impl FnMut(u8) -> bool) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(k, _)| pred(*k as u8))
            .map(|(_, &c)| c)
            .sum()
    }
}

/// Both sides of `Σ_{n≤x} ω(n) = Σ_{p≤x} ⌊x/p⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeanIdentity {
    pub x: u64,
    /// `Σ_{n≤x} ω(n)` from the sieve.
    pub omega_sum: u64,
    /// `Σ_{p≤x} ⌊x/p⌋`.
    pub floor_sum: u64,
}

impl MeanIdentity {
    pub fn lhs(&self) -> Ratio<u64> {
        Ratio::new(self.omega_sum, self.x)
    }

    pub fn rhs(&self) -> Ratio<u64> {
        Ratio::new(self.floor_sum, self.x)
    }

    pub fn holds(&self) -> bool {
        self.omega_sum == self.floor_sum
    }
}

/// `Σ_{p≤x} ⌊x/p⌋`.
pub fn floor_sum_over_primes(x: u64) -> u64 {
    primes_up_to(x).iter().map(|&p| x / p).sum()
}

pub fn mean_omega_identity(x: u64) -> Result<MeanIdentity> {
    if x < 2 {
        return Err(Error::InvalidParameter("mean identity needs x >= 2"));
    }
    let sieve = OmegaSieve::new(x + 1)?;
    let mut scratch = Scratch::default();
    let mut seg = OmegaSegment::default();
    let mut hist = OmegaHistogram::default();
    for (a, b) in OmegaSieve::segment_bounds(1, x + 1, DEFAULT_SEGMENT) {
        sieve.sieve_segment(a, b, None, &mut seg, &mut scratch)?;
        hist.add_counts(&seg.full);
    }
    Ok(MeanIdentity {
        x,
        omega_sum: hist.omega_sum(),
        floor_sum: floor_sum_over_primes(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega_trial(mut n: u64) -> u8 {
        let mut k = 0;
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                k += 1;
                while n.is_multiple_of(d) {
                    n /= d;
                }
            }
            d += 1;
        }
        k + (n > 1) as u8
    }

    #[test]
    fn named_values() {
        let t = omega_table(1, 30_031, WindowBounds::new(10.0, 30.0).ok()).unwrap();
        assert_eq!(t.omega(1), 0);
        assert_eq!(t.omega(12), 2);
        assert_eq!(t.omega(30_030), 6);
        assert_eq!(t.omega_window(143), 2);
        assert_eq!(t.omega_window(77), 1);
        assert_eq!(t.omega_window(30_030), 2);
    }

    #[test]
    fn small_segments_agree_with_trial_division() {
        let w = WindowBounds::new(3.5, 50.0).unwrap();
        let t = omega_table_with(1, 5_000, Some(w), 97, &SieveBudget::default()).unwrap();
        for n in 1..5_000u64 {
            assert_eq!(t.omega(n), omega_trial(n), "n={n}");
        }
        let whole = omega_table(1, 5_000, Some(w)).unwrap();
        assert_eq!(t, whole);
    }

    #[test]
    fn high_offset_segment() {
        let lo = 1_000_000_000_000u64;
        let t = omega_table_with(lo, lo + 2_000, None, 333, &SieveBudget::default()).unwrap();
        for n in (lo..lo + 2_000).step_by(7) {
            assert_eq!(t.omega(n), omega_trial(n), "n={n}");
        }
    }

    #[test]
    fn mean_identity_small() {
        let m = mean_omega_identity(10).unwrap();
        assert_eq!(m.omega_sum, 11);
        assert_eq!(m.lhs(), Ratio::new(11, 10));
        assert_eq!(m.rhs(), Ratio::new(11, 10));
        let m = mean_omega_identity(2).unwrap();
        assert_eq!(m.lhs(), Ratio::new(1, 2));
        assert!(m.holds());
    }

    #[test]
    fn coverage_errors() {
        let t = omega_table(5, 10, None).unwrap();
        assert!(t.require(5, 9).is_ok());
        assert!(matches!(t.require(4, 9), Err(Error::Coverage { .. })));
        assert!(matches!(t.require(5, 10), Err(Error::Coverage { .. })));
        assert!(omega_table(0, 10, None).is_err());
    }
}
