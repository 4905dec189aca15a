//! End-to-end experiments shared by the command line and the test suites.

use num_rational::BigRational;
use omegaspace_core::charfunc::{ek_from_histogram, CharFunEval, ErdosKac};
use omegaspace_core::fmodel::{
    abs_diff_f64, correlation_main_term, empirical_f_average, FactoredTuple,
};
use omegaspace_core::normality::{enumerate_normal_to, Convention};
use omegaspace_core::primes::primes_up_to;
use omegaspace_core::spacings::{
    poisson_moment, window_count_moment, PoissonMoment, SpacingStats, SurvivalRow, WindowMoment,
};
use omegaspace_core::sum::NeumaierSum;
use omegaspace_core::{
    loglog, NormalSequence, NormalityContext, OmegaTable, PrimeWindow, WindowBounds,
};

use crate::cache::{CacheError, TableCache};
use crate::format::{round12, FcheckRecord, MomentRecord};
use crate::par::Parallel;

/// Constant in the `C·Π τ(Aᵢ)²/x` error allowance for correlation averages.
pub const TAU_CONSTANT: f64 = 10.0;

#[derive(Debug, Clone, Default)]
pub struct Lab {
    pub par: Parallel,
    pub cache: TableCache,
}

impl Lab {
    pub fn new(par: Parallel) -> Self {
        Self {
            par,
            cache: TableCache::default(),
        }
    }

    pub fn table(
        &self,
        lo: u64,
        hi: u64,
        window: Option<WindowBounds>,
    ) -> Result<OmegaTable, CacheError> {
        self.cache.get(&self.par, lo, hi, window)
    }

    /// δ-normal integers up to `x·s + extra`.
    pub fn normal_sequence(
        &self,
        ctx: &NormalityContext,
        extra: u64,
    ) -> Result<NormalSequence, CacheError> {
        let limit = ctx.enumeration_limit() + extra;
        let table = self.table(1, limit + 1, None)?;
        Ok(enumerate_normal_to(ctx, &table, limit)?)
    }

    pub fn survival(
        &self,
        ctx: &NormalityContext,
        lambdas: &[f64],
        i_max: Option<usize>,
    ) -> Result<SurvivalReport, CacheError> {
        let seq = self.normal_sequence(ctx, 0)?;
        let stats = SpacingStats::new(&seq)?;
        let i_max = i_max.unwrap_or_else(|| stats.default_i_max(ctx.x));
        let rows = stats.survival_curve(lambdas, i_max)?;
        Ok(SurvivalReport {
            x: ctx.x,
            delta: ctx.delta,
            count: seq.len(),
            i_max,
            mean_spacing: stats.mean_spacing(),
            rows,
        })
    }

    pub fn moment(
        &self,
        ctx: &NormalityContext,
        m: u32,
        lambda: f64,
    ) -> Result<MomentReport, CacheError> {
        let reach = (lambda * ctx.rescale).floor() as u64;
        let seq = self.normal_sequence(ctx, reach)?;
        let empirical = window_count_moment(ctx, &seq, m, lambda)?;
        let poisson = poisson_moment(m, lambda)?;
        Ok(MomentReport { empirical, poisson })
    }

    pub fn charfun(
        &self,
        x: u64,
        window: &PrimeWindow,
        t_values: &[f64],
        shifts: &[u64],
    ) -> Result<CharFunEval, CacheError> {
        let b_max = shifts.last().copied().unwrap_or(0);
        let table = self.table(1, x + b_max + 1, Some(window.bounds()))?;
        let lhs = self
            .par
            .empirical_charfun(x, window, t_values, shifts, &table)?;
        Ok(CharFunEval::from_parts(x, window, t_values, shifts, lhs)?)
    }

    /// Erdős–Kac mass from a streamed histogram of `[1, x]`.
    pub fn ek(&self, x: u64, c: f64) -> Result<ErdosKac, CacheError> {
        let hist = self.par.histogram(1, x + 1)?;
        Ok(ek_from_histogram(x, c, &hist)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalReport {
    pub x: f64,
    pub delta: f64,
    /// Number of δ-normal integers up to `x·s`.
    pub count: usize,
    pub i_max: usize,
    pub mean_spacing: Option<f64>,
    pub rows: Vec<SurvivalRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub empirical: WindowMoment,
    pub poisson: PoissonMoment,
}

impl MomentReport {
    pub fn record(&self) -> MomentRecord {
        MomentRecord {
            m: self.empirical.m,
            lambda: round12(self.empirical.lambda),
            empirical_moment: round12(self.empirical.value()),
            poisson_moment: round12(self.poisson.series_sum),
        }
    }
}

pub fn context(x: f64, delta: f64, per_integer: bool) -> omegaspace_core::Result<NormalityContext> {
    let ctx = NormalityContext::new(x, delta)?;
    Ok(if per_integer {
        ctx.with_convention(Convention::PerInteger)
    } else {
        ctx
    })
}

/// `Σ_{p≤x} 1/p − ln ln x`.
pub fn mertens(x: u64) -> f64 {
    let s: NeumaierSum = primes_up_to(x)
        .iter()
        .rev()
        .map(|&p| 1.0 / p as f64)
        .collect();
    s.value() - loglog(x as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcheckReport {
    pub x: u64,
    pub empirical: BigRational,
    pub main_term: BigRational,
    pub abs_err: f64,
    /// `C·Π τ(Aᵢ)²/x`.
    pub tau_bound: f64,
}

impl FcheckReport {
    pub fn record(&self) -> FcheckRecord {
        FcheckRecord {
            empirical: round12(to_f64(&self.empirical)),
            main_term: round12(to_f64(&self.main_term)),
            abs_err: round12(self.abs_err),
            tau_bound: round12(self.tau_bound),
        }
    }
}

fn to_f64(q: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

pub fn fcheck(x: u64, values: &[u64], shifts: &[u64]) -> omegaspace_core::Result<FcheckReport> {
    let tuple = FactoredTuple::new(values)?;
    let main_term = correlation_main_term(&tuple)?;
    let empirical = empirical_f_average(x, &tuple, shifts)?;
    Ok(FcheckReport {
        x,
        abs_err: abs_diff_f64(&empirical, &main_term),
        tau_bound: TAU_CONSTANT * tuple.tau_squared_product() as f64 / x as f64,
        empirical,
        main_term,
    })
}
