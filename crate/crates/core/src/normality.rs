//! The δ-normal predicate and plain/correlated counts of δ-normal integers.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::loglog;
use crate::omega::OmegaTable;

/// Which centring the predicate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// `|ω(n) − log₂x| ≤ √(π/2)·(log₂x)^δ`, one centre for every n.
    #[default]
    Scale,
    /// `|ω(n) − log₂n| ≤ (log₂n)^δ`, centred on each n itself.
    PerInteger,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityContext {
    pub x: f64,
    pub delta: f64,
    /// `log₂x = ln ln x`.
    pub center: f64,
    pub threshold: f64,
    /// `s = (log₂x)^{1/2−δ}`, the reciprocal density of δ-normal integers.
    pub rescale: f64,
    /// `x·s`.
    pub enumeration_bound: f64,
    pub convention: Convention,
    /// λ in the shift bound `b ≤ λ(log₂x)^{1/2−δ}`.
    pub shift_lambda: f64,
}

impl NormalityContext {
    pub fn new(x: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidDelta(delta));
        }
        if !(x > core::f64::consts::E) || !x.is_finite() {
            return Err(Error::InvalidParameter(
                "scale x must exceed e so that ln ln x > 0",
            ));
        }
        let center = loglog(x);
        let threshold = libm::sqrt(FRAC_PI_2) * libm::pow(center, delta);
        let rescale = libm::pow(center, 0.5 - delta);
        Ok(Self {
            x,
            delta,
            center,
            threshold,
            rescale,
            enumeration_bound: x * rescale,
            convention: Convention::Scale,
            shift_lambda: 1.0,
        })
    }

    /// A context with hand-picked centre, threshold and rescale; δ is not
    /// derived and is stored as NaN.
    pub fn from_parts(x: f64, center: f64, threshold: f64, rescale: f64) -> Result<Self> {
        if !(threshold > 0.0) || !(rescale > 0.0) || !(x > 0.0) {
            return Err(Error::InvalidParameter(
                "threshold, rescale and x must be positive",
            ));
        }
        Ok(Self {
            x,
            delta: f64::NAN,
            center,
            threshold,
            rescale,
            enumeration_bound: x * rescale,
            convention: Convention::Scale,
            shift_lambda: 1.0,
        })
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_shift_lambda(mut self, lambda: f64) -> Self {
        self.shift_lambda = lambda;
        self
    }

    /// `⌊x·s⌋`.
    pub fn enumeration_limit(&self) -> u64 {
        libm::floor(self.enumeration_bound) as u64
    }

    /// Largest shift allowed by `λ(log₂x)^{1/2−δ}`.
    pub fn shift_bound(&self) -> f64 {
        self.shift_lambda * self.rescale
    }
}

/// True iff `n` (with `ω(n) = omega_n`) is δ-normal under `ctx`.
/// Ties at the threshold count as normal.
#[inline]
pub fn is_delta_normal(n: u64, omega_n: u8, ctx: &NormalityContext) -> bool {
    match ctx.convention {
        Convention::Scale => libm::fabs(omega_n as f64 - ctx.center) <= ctx.threshold,
        Convention::PerInteger => {
            let c = loglog(n as f64);
            if !(c > 0.0) {
                return false;
            }
            libm::fabs(omega_n as f64 - c) <= libm::pow(c, ctx.delta)
        }
    }
}

/// Per-ω lookup for the scale convention, where the predicate depends on ω only.
fn omega_mask(ctx: &NormalityContext) -> Option<[bool; 16]> {
    match ctx.convention {
        Convention::Scale => {
            let mut m = [false; 16];
            for (k, slot) in m.iter_mut().enumerate() {
                *slot = is_delta_normal(1, k as u8, ctx);
            }
            Some(m)
        }
        Convention::PerInteger => None,
    }
}

/// Normal-indicator for every n in `[a, b]` (inclusive), read from the table.
pub fn normal_flags(
    ctx: &NormalityContext,
    table: &OmegaTable,
    a: u64,
    b: u64,
) -> Result<Vec<bool>> {
    if b < a {
        return Ok(Vec::new());
    }
    table.require(a, b)?;
    let counts = &table.full_counts()[(a - table.lo()) as usize..=(b - table.lo()) as usize];
    Ok(match omega_mask(ctx) {
        Some(mask) => counts.iter().map(|&w| mask[w as usize]).collect(),
        None => counts
            .iter()
            .enumerate()
            .map(|(i, &w)| is_delta_normal(a + i as u64, w, ctx))
            .collect(),
    })
}

/// δ-normal integers in increasing order, complete up to `limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSequence {
    pub context: NormalityContext,
    pub values: Vec<u64>,
    /// Every δ-normal integer `≤ limit` is present.
    pub limit: u64,
}

impl NormalSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `𝒩(t)`: how many δ-normal integers are `≤ t` (requires `t ≤ limit`).
    pub fn count_up_to(&self, t: u64) -> usize {
        self.values.partition_point(|&v| v <= t)
    }
}

/// All δ-normal integers `n ≤ ⌊x·s⌋`.
pub fn enumerate_normal(ctx: &NormalityContext, table: &OmegaTable) -> Result<NormalSequence> {
    enumerate_normal_to(ctx, table, ctx.enumeration_limit())
}

/// All δ-normal integers `n ≤ limit`.
pub fn enumerate_normal_to(
    ctx: &NormalityContext,
    table: &OmegaTable,
    limit: u64,
) -> Result<NormalSequence> {
    let values = if limit == 0 {
        Vec::new()
    } else {
        let flags = normal_flags(ctx, table, 1, limit)?;
        flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i as u64 + 1)
            .collect()
    };
    Ok(NormalSequence {
        context: *ctx,
        values,
        limit,
    })
}

/// `N(X) = #{n ≤ X : n δ-normal}`.
pub fn count_normal(ctx: &NormalityContext, limit: u64, table: &OmegaTable) -> Result<u64> {
    if limit == 0 {
        return Ok(0);
    }
    Ok(normal_flags(ctx, table, 1, limit)?
        .iter()
        .filter(|&&f| f)
        .count() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelatedCount {
    pub count: u64,
    /// Largest shift exceeds `λ(log₂x)^{1/2−δ}`.
    pub exceeds_shift_bound: bool,
}

pub fn validate_shifts(shifts: &[u64]) -> Result<()> {
    if shifts.is_empty() || shifts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidShifts);
    }
    Ok(())
}

/// `N_{b₁..b_r}(X) = #{n ≤ X : n+bᵢ δ-normal for every i}`.
pub fn correlated_count(
    ctx: &NormalityContext,
    limit: u64,
    shifts: &[u64],
    table: &OmegaTable,
) -> Result<CorrelatedCount> {
    validate_shifts(shifts)?;
    let b_max = *shifts.last().unwrap();
    let exceeds_shift_bound = b_max as f64 > ctx.shift_bound();
    if limit == 0 {
        return Ok(CorrelatedCount {
            count: 0,
            exceeds_shift_bound,
        });
    }
    let flags = normal_flags(ctx, table, 1, limit + b_max)?;
    let count = (0..limit as usize)
        .filter(|&i| shifts.iter().all(|&b| flags[i + b as usize]))
        .count() as u64;
    Ok(CorrelatedCount {
        count,
        exceeds_shift_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega::omega_table;
    use alloc::vec;

    fn toy() -> NormalityContext {
        NormalityContext::from_parts(10.0, 1.5, 0.5, 1.0).unwrap()
    }

    #[test]
    fn predicate_examples() {
        let ctx = NormalityContext::from_parts(1.0, 4.0, libm::sqrt(FRAC_PI_2) * 2.0, 1.0).unwrap();
        assert!((ctx.threshold - 2.5066).abs() < 1e-4);
        assert!(is_delta_normal(6, 2, &ctx));
        assert!(!is_delta_normal(6, 7, &ctx));
        assert!(is_delta_normal(6, 4, &ctx));
        let tie = NormalityContext::from_parts(1.0, 4.0, 1.0, 1.0).unwrap();
        assert!(is_delta_normal(6, 3, &tie));
        assert!(is_delta_normal(6, 5, &tie));
    }

    #[test]
    fn delta_range_is_open() {
        assert!(NormalityContext::new(1e6, 0.0).is_err());
        assert!(NormalityContext::new(1e6, 0.5).is_err());
        assert!(NormalityContext::new(2.0, 0.25).is_err());
        let c = NormalityContext::new(1e6, 0.25).unwrap();
        assert!(c.rescale > 1.0);
        assert_eq!(c.enumeration_bound, c.x * c.rescale);
    }

    #[test]
    fn toy_enumeration_and_counts() {
        let t = omega_table(1, 11, None).unwrap();
        let ctx = toy();
        let seq = enumerate_normal_to(&ctx, &t, 10).unwrap();
        assert_eq!(seq.values, vec![2, 3, 4, 5, 6, 7, 8, 9, 10]);
        assert_eq!(count_normal(&ctx, 10, &t).unwrap(), 9);
        assert_eq!(count_normal(&ctx, 1, &t).unwrap(), 0);
        let c = correlated_count(&ctx, 9, &[0, 1], &t).unwrap();
        assert_eq!(c.count, 8);
        assert_eq!(
            correlated_count(&ctx, 10, &[0], &t).unwrap().count,
            count_normal(&ctx, 10, &t).unwrap()
        );
        assert!(enumerate_normal_to(&ctx, &t, 0).unwrap().is_empty());
    }

    #[test]
    fn shift_validation_and_coverage() {
        let t = omega_table(1, 11, None).unwrap();
        let ctx = toy();
        assert_eq!(
            correlated_count(&ctx, 5, &[1, 1], &t),
            Err(Error::InvalidShifts)
        );
        assert_eq!(
            correlated_count(&ctx, 5, &[2, 1], &t),
            Err(Error::InvalidShifts)
        );
        assert!(matches!(
            correlated_count(&ctx, 10, &[0, 1], &t),
            Err(Error::Coverage { .. })
        ));
        assert!(
            correlated_count(&ctx, 5, &[0, 2], &t)
                .unwrap()
                .exceeds_shift_bound
        );
        assert!(matches!(
            count_normal(&ctx, 11, &t),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn per_integer_convention() {
        let ctx = NormalityContext::new(1e6, 0.25)
            .unwrap()
            .with_convention(Convention::PerInteger);
        // ln ln 2 < 0, so small n never qualify
        assert!(!is_delta_normal(2, 1, &ctx));
        // ln ln 1e6 ≈ 2.626, (2.626)^0.25 ≈ 1.273
        assert!(is_delta_normal(1_000_000, 2, &ctx));
        assert!(!is_delta_normal(1_000_000, 4, &ctx));
    }
}
