//! Deterministic parallel sieving and reductions.
//!
//! Work is cut into pieces whose boundaries depend only on the range and
//! the configured segment size, never on the thread count, and partial
//! results are merged in piece order. Outputs are therefore identical for
//! any number of workers.

use num_complex::Complex64;
use omegaspace_core::charfunc::charfun_partial_sum;
use omegaspace_core::omega::Scratch;
use omegaspace_core::primes::DEFAULT_SEGMENT;
use omegaspace_core::sum::ComplexSum;
use omegaspace_core::{
    OmegaHistogram, OmegaSieve, OmegaTable, PrimeWindow, Result, SieveBudget, WindowBounds,
};
use rayon::prelude::*;

/// Integers per shard for reductions over an existing table.
const REDUCE_SHARD: u64 = 1 << 20;

#[derive(Debug, Clone, Copy)]
pub struct Parallel {
    pub threads: usize,
    pub segment: usize,
    pub budget: SieveBudget,
}

impl Default for Parallel {
    fn default() -> Self {
        Self {
            threads: rayon::current_num_threads(),
            segment: DEFAULT_SEGMENT,
            budget: SieveBudget::default(),
        }
    }
}

impl Parallel {
    pub fn new(threads: usize) -> Self {
        Self {
            threads: threads.max(1),
            ..Self::default()
        }
    }

    pub fn with_segment(mut self, segment: usize) -> Self {
        self.segment = segment.max(1);
        self
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
        {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }

    /// ω table over `[lo, hi)`, each segment sieved straight into place.
    pub fn omega_table(
        &self,
        lo: u64,
        hi: u64,
        window: Option<WindowBounds>,
    ) -> Result<OmegaTable> {
        if lo < 1 || hi <= lo {
            return Err(omegaspace_core::Error::InvalidRange { lo, hi, min: 1 });
        }
        self.budget.check(lo, hi)?;
        let sieve = OmegaSieve::with_budget(hi, &self.budget)?;
        let len = (hi - lo) as usize;
        let mut full = vec![0u8; len];
        let mut windowed = window.map(|_| vec![0u8; len]);
        let seg = self.segment;
        self.install(|| -> Result<()> {
            match windowed.as_mut() {
                Some(w) => full
                    .par_chunks_mut(seg)
                    .zip(w.par_chunks_mut(seg))
                    .enumerate()
                    .try_for_each_init(Scratch::default, |scratch, (k, (f, w))| {
                        let a = lo + (k * seg) as u64;
                        sieve.sieve_into(a, a + f.len() as u64, window, f, Some(w), scratch)
                    }),
                None => full.par_chunks_mut(seg).enumerate().try_for_each_init(
                    Scratch::default,
                    |scratch, (k, f)| {
                        let a = lo + (k * seg) as u64;
                        sieve.sieve_into(a, a + f.len() as u64, None, f, None, scratch)
                    },
                ),
            }
        })?;
        OmegaTable::from_parts(lo, hi, full, window, windowed)
    }

    /// Streams `[lo, hi)` segment by segment, folding each segment's
    /// counters into a per-segment accumulator and merging in order.
    pub fn fold_segments<A, F, M>(
        &self,
        lo: u64,
        hi: u64,
        window: Option<WindowBounds>,
        fold: F,
        mut merge: M,
        init: A,
    ) -> Result<A>
    where
        A: Send,
        F: Fn(u64, &[u8], Option<&[u8]>) -> A + Sync + Send,
        M: FnMut(A, A) -> A,
    {
        if lo < 1 || hi <= lo {
            return Err(omegaspace_core::Error::InvalidRange { lo, hi, min: 1 });
        }
        let sieve = OmegaSieve::with_budget(hi, &self.budget)?;
        let bounds: Vec<(u64, u64)> = OmegaSieve::segment_bounds(lo, hi, self.segment).collect();
        let parts: Vec<A> = self.install(|| {
            bounds
                .par_iter()
                .map_init(
                    || (Scratch::default(), Vec::new(), Vec::new()),
                    |(scratch, f, w), &(a, b)| -> Result<A> {
                        let n = (b - a) as usize;
                        f.resize(n, 0);
                        let wslice = match window {
                            Some(_) => {
                                w.resize(n, 0);
                                Some(&mut w[..n])
                            }
                            None => None,
                        };
                        sieve.sieve_into(a, b, window, &mut f[..n], wslice, scratch)?;
                        Ok(fold(a, &f[..n], window.map(|_| &w[..n])))
                    },
                )
                .collect::<Result<Vec<A>>>()
        })?;
        Ok(parts.into_iter().fold(init, &mut merge))
    }

    /// Exact ω histogram of `[lo, hi)` without materializing a table.
    pub fn histogram(&self, lo: u64, hi: u64) -> Result<OmegaHistogram> {
        self.fold_segments(
            lo,
            hi,
            None,
            |_, full, _| {
                let mut h = OmegaHistogram::default();
                h.add_counts(full);
                h
            },
            |mut a, b| {
                a.merge(&b);
                a
            },
            OmegaHistogram::default(),
        )
    }

    /// `(1/x) Σ_{n≤x} Πᵢ exp(iTᵢ(ω(n+bᵢ;y,z) − S)/√S)`, sharded.
    pub fn empirical_charfun(
        &self,
        x: u64,
        window: &PrimeWindow,
        t_values: &[f64],
        shifts: &[u64],
        table: &OmegaTable,
    ) -> Result<Complex64> {
        if x == 0 {
            return Err(omegaspace_core::Error::InvalidParameter(
                "x must be positive",
            ));
        }
        let shards: Vec<(u64, u64)> = (0..x.div_ceil(REDUCE_SHARD))
            .map(|k| (1 + k * REDUCE_SHARD, x.min((k + 1) * REDUCE_SHARD)))
            .collect();
        let parts = self.install(|| {
            shards
                .par_iter()
                .map(|&(a, b)| charfun_partial_sum(a, b, window, t_values, shifts, table))
                .collect::<Result<Vec<ComplexSum>>>()
        })?;
        let total = parts.iter().fold(ComplexSum::new(), |mut acc, p| {
            acc.merge(p);
            acc
        });
        Ok(total.value() / x as f64)
    }
}
