//! Joint characteristic function of the windowed counts ω(n+bᵢ;y,z),
//! its closed-form Poisson counterpart, Gaussian approximations, and the
//! Erdős–Kac distribution check.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loglog;
use crate::normality::validate_shifts;
use crate::omega::{OmegaHistogram, OmegaTable, WindowBounds};
use crate::primes::PrimeWindow;
use crate::sum::ComplexSum;

/// `y = (log x)^{3r}` and `z = x^{(log₂x)^{−3r}}`, rejected when `y ≥ z`.
pub fn asymptotic_cutoffs(x: f64, r: u32) -> Result<WindowBounds> {
    if !(x > core::f64::consts::E) {
        return Err(Error::InvalidParameter("cutoffs need x > e"));
    }
    let e = 3.0 * r as f64;
    let y = libm::pow(libm::log(x), e);
    let z = libm::pow(x, libm::pow(loglog(x), -e));
    WindowBounds::new(y, z)
}

fn check_table_window(window: &PrimeWindow, table: &OmegaTable) -> Result<()> {
    match table.window() {
        Some(b) if b == window.bounds() => Ok(()),
        _ => Err(Error::InvalidParameter(
            "table was not sieved with the requested prime window",
        )),
    }
}

/// Per-shift phase lookup `Tᵢ(w − S)/√S` for every counter value w.
fn phase_tables(s: f64, t_values: &[f64]) -> Vec<[f64; 16]> {
    let root = libm::sqrt(s);
    t_values
        .iter()
        .map(|&t| {
            let mut row = [0.0; 16];
            for (w, slot) in row.iter_mut().enumerate() {
                *slot = t * (w as f64 - s) / root;
            }
            row
        })
        .collect()
}

/// Unnormalized sum of `Πᵢ exp(iTᵢ(ω(n+bᵢ;y,z) − S)/√S)` over `n ∈ [a, b]`.
pub fn charfun_partial_sum(
    a: u64,
    b: u64,
    window: &PrimeWindow,
    t_values: &[f64],
    shifts: &[u64],
    table: &OmegaTable,
) -> Result<ComplexSum> {
    let s = window.nonzero_sum()?;
    validate_shifts(shifts)?;
    if t_values.len() != shifts.len() {
        return Err(Error::InvalidParameter(
            "T and shifts must have equal length",
        ));
    }
    check_table_window(window, table)?;
    let mut acc = ComplexSum::new();
    if b < a {
        return Ok(acc);
    }
    let b_max = *shifts.last().unwrap();
    table.require(a, b + b_max)?;
    let phases = phase_tables(s, t_values);
    let counts = table.window_counts();
    let base = (a - table.lo()) as usize;
    for i in 0..=(b - a) as usize {
        let mut phase = 0.0;
        for (row, &shift) in phases.iter().zip(shifts) {
            phase += row[counts[base + i + shift as usize] as usize];
        }
        let (sin, cos) = libm::sincos(phase);
        acc.add(Complex64::new(cos, sin));
    }
    Ok(acc)
}

/// `(1/x) Σ_{n≤x} Πᵢ exp(iTᵢ(ω(n+bᵢ;y,z) − S)/√S)`.
pub fn empirical_charfun(
    x: u64,
    window: &PrimeWindow,
    t_values: &[f64],
    shifts: &[u64],
    table: &OmegaTable,
) -> Result<Complex64> {
    if x == 0 {
        return Err(Error::InvalidParameter("x must be positive"));
    }
    let acc = charfun_partial_sum(1, x, window, t_values, shifts, table)?;
    Ok(acc.value() / x as f64)
}

/// `Πᵢ exp((e^{itᵢ} − 1 − itᵢ)·S)` with `tᵢ = Tᵢ/√S`.
pub fn analytic_charfun_from_sum(s: f64, t_values: &[f64]) -> Result<Complex64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter("reciprocal sum must be positive"));
    }
    let root = libm::sqrt(s);
    let exponent = t_values
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &big_t| {
            let t = big_t / root;
            // e^{it} − 1 − it, with the real part written to avoid cancellation
            let half = libm::sin(t / 2.0);
            acc + Complex64::new(-2.0 * half * half, libm::sin(t) - t) * s
        });
    Ok(exponent.exp())
}

pub fn analytic_charfun(window: &PrimeWindow, t_values: &[f64]) -> Result<Complex64> {
    analytic_charfun_from_sum(window.nonzero_sum()?, t_values)
}

/// Both sides of the joint characteristic-function identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunEval {
    pub x: u64,
    pub y: f64,
    pub z: f64,
    pub reciprocal_sum: f64,
    pub shifts: Vec<u64>,
    pub big_t: Vec<f64>,
    /// `tᵢ = Tᵢ/√S`.
    pub t: Vec<f64>,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_error: f64,
    /// Some `|Tᵢ|` exceeds `√S/1000`.
    pub soft_limit_exceeded: bool,
}

impl CharFunEval {
    pub fn from_parts(
        x: u64,
        window: &PrimeWindow,
        t_values: &[f64],
        shifts: &[u64],
        lhs: Complex64,
    ) -> Result<Self> {
        let s = window.nonzero_sum()?;
        let rhs = analytic_charfun_from_sum(s, t_values)?;
        let root = libm::sqrt(s);
        Ok(Self {
            x,
            y: window.y(),
            z: window.z(),
            reciprocal_sum: s,
            shifts: shifts.to_vec(),
            big_t: t_values.to_vec(),
            t: t_values.iter().map(|&v| v / root).collect(),
            lhs,
            rhs,
            abs_error: (lhs - rhs).norm(),
            soft_limit_exceeded: t_values.iter().any(|&v| libm::fabs(v) > root / 1000.0),
        })
    }
}

pub fn charfun_eval(
    x: u64,
    window: &PrimeWindow,
    t_values: &[f64],
    shifts: &[u64],
    table: &OmegaTable,
) -> Result<CharFunEval> {
    let lhs = empirical_charfun(x, window, t_values, shifts, table)?;
    CharFunEval::from_parts(x, window, t_values, shifts, lhs)
}

/// Closed form against `exp(−T²/2)` for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCheck {
    pub s: f64,
    pub big_t: f64,
    pub exact: Complex64,
    pub gauss: f64,
    /// `|exact / gauss − 1|`.
    pub ratio_error: f64,
    /// `|T| ≤ √S`, where `|exact| ≤ exp(−T²/4)` is expected.
    pub decay_regime: bool,
    pub decay_holds: bool,
}

pub fn gaussian_approx_check(s: f64, big_t: f64) -> Result<GaussianCheck> {
    let exact = analytic_charfun_from_sum(s, &[big_t])?;
    let gauss = libm::exp(-big_t * big_t / 2.0);
    let ratio_error = (exact / gauss - 1.0).norm();
    let decay_regime = libm::fabs(big_t) <= libm::sqrt(s);
    let decay_holds = exact.norm() <= libm::exp(-big_t * big_t / 4.0);
    Ok(GaussianCheck {
        s,
        big_t,
        exact,
        gauss,
        ratio_error,
        decay_regime,
        decay_holds,
    })
}

/// `erf(x)`. Positive-term series `e^{−x²}Σ 2ⁿx^{2n+1}/(2n+1)!!` below 3,
/// Lentz continued fraction for `erfc` above.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 3.0 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 0u32;
        while term > 1e-17 * sum {
            k += 1;
            term *= 2.0 * x2 / (2 * k + 1) as f64;
            sum += term;
        }
        FRAC_2_SQRT_PI * libm::exp(-x2) * sum
    } else {
        1.0 - erfc_large(x)
    }
}

/// `erfc(x)` for `x ≥ 3`: `e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`.
fn erfc_large(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if libm::fabs(delta - 1.0) < 1e-16 {
            break;
        }
    }
    FRAC_2_SQRT_PI / 2.0 * libm::exp(-x * x) / f
}

/// Standard normal CDF Φ.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / SQRT_2))
}

/// `(1/√(2π)) ∫_{−c}^{c} e^{−u²/2} du`.
pub fn gaussian_mass(c: f64) -> f64 {
    erf(c / SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErdosKac {
    pub x: u64,
    pub c: f64,
    pub empirical: f64,
    pub gaussian: f64,
}

impl ErdosKac {
    pub fn gap(&self) -> f64 {
        libm::fabs(self.empirical - self.gaussian)
    }
}

fn ek_inside(omega: u8, center: f64, root: f64, c: f64) -> bool {
    let u = (omega as f64 - center) / root;
    -c < u && u < c
}

/// `(1/x)#{n ≤ x : −c < (ω(n) − log₂x)/√log₂x < c}` beside its Gaussian limit.
pub fn ek_empirical(x: u64, c: f64, table: &OmegaTable) -> Result<ErdosKac> {
    table.require(1, x)?;
    let mut hist = OmegaHistogram::default();
    hist.add_counts(&table.full_counts()[..x as usize]);
    ek_from_histogram(x, c, &hist)
}

/// Same statistic from an exact ω histogram of `[1, x]`.
pub fn ek_from_histogram(x: u64, c: f64, hist: &OmegaHistogram) -> Result<ErdosKac> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter("c must be positive"));
    }
    if !(x as f64 > core::f64::consts::E) {
        return Err(Error::InvalidParameter("x must exceed e"));
    }
    if hist.total() != x {
        return Err(Error::InvalidParameter("histogram does not cover [1, x]"));
    }
    let center = loglog(x as f64);
    let root = libm::sqrt(center);
    let inside = hist.count_where(|w| ek_inside(w, center, root, c));
    Ok(ErdosKac {
        x,
        c,
        empirical: inside as f64 / x as f64,
        gaussian: gaussian_mass(c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub min: f64,
    pub median: f64,
    pub q90: f64,
    pub q99: f64,
    pub max: f64,
}

/// Distribution of the gap between full and windowed normalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancySummary {
    pub x: u64,
    pub sample_size: usize,
    pub seed: u64,
    /// `(log₂x)^{−1/2+δ/2}`.
    pub threshold: f64,
    pub quantiles: Option<Quantiles>,
    pub exceed_fraction: Option<f64>,
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let idx = libm::ceil(q * sorted.len() as f64) as usize;
    sorted[idx.clamp(1, sorted.len()) - 1]
}

/// Samples `n ≤ x` and measures
/// `|(ω(n) − log₂x)/√log₂x − (ω(n;y,z) − S)/√S|`.
pub fn truncation_discrepancy(
    x: u64,
    window: &PrimeWindow,
    sample_size: usize,
    seed: u64,
    delta: f64,
    table: &OmegaTable,
) -> Result<DiscrepancySummary> {
    check_table_window(window, table)?;
    truncation_discrepancy_centered(x, window.nonzero_sum()?, sample_size, seed, delta, table)
}

/// As [`truncation_discrepancy`] with the windowed centre `S` given explicitly.
pub fn truncation_discrepancy_centered(
    x: u64,
    s: f64,
    sample_size: usize,
    seed: u64,
    delta: f64,
    table: &OmegaTable,
) -> Result<DiscrepancySummary> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter("windowed centre must be positive"));
    }
    if !table.has_window() {
        return Err(Error::InvalidParameter("table lacks windowed counts"));
    }
    let center = loglog(x as f64);
    if !(center > 0.0) {
        return Err(Error::InvalidParameter("x must exceed e"));
    }
    table.require(1, x)?;
    let threshold = libm::pow(center, -0.5 + delta / 2.0);
    let mut summary = DiscrepancySummary {
        x,
        sample_size,
        seed,
        threshold,
        quantiles: None,
        exceed_fraction: None,
    };
    if sample_size == 0 {
        return Ok(summary);
    }
    let (root_l, root_s) = (libm::sqrt(center), libm::sqrt(s));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..sample_size)
        .map(|_| {
            let n = rng.gen_range(1..=x);
            let full = (table.omega(n) as f64 - center) / root_l;
            let win = (table.omega_window(n) as f64 - s) / root_s;
            libm::fabs(full - win)
        })
        .collect();
    values.sort_unstable_by(f64::total_cmp);
    let exceed = values.iter().filter(|&&v| v > threshold).count();
    summary.quantiles = Some(Quantiles {
        min: values[0],
        median: nearest_rank(&values, 0.5),
        q90: nearest_rank(&values, 0.9),
        q99: nearest_rank(&values, 0.99),
        max: values[values.len() - 1],
    });
    summary.exceed_fraction = Some(exceed as f64 / sample_size as f64);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega::omega_table;

    #[test]
    fn erf_reference_points() {
        assert_eq!(erf(0.0), 0.0);
        assert!((gaussian_mass(1.0) - 0.682_689_492_137_086).abs() < 1e-12);
        assert!((normal_cdf(2.0) - 0.977_249_868_051_821).abs() < 1e-12);
        // both branches meet smoothly at 3
        assert!((erf(3.0 - 1e-12) - erf(3.0)).abs() < 1e-12);
        let tail = erfc_large(5.0);
        assert!((tail / 1.537_459_794_428_035e-12 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn charfun_at_zero_is_one() {
        let w = PrimeWindow::new(10.0, 30.0).unwrap();
        let t = omega_table(1, 200, Some(w.bounds())).unwrap();
        let lhs = empirical_charfun(150, &w, &[0.0, 0.0], &[0, 1], &t).unwrap();
        assert_eq!(lhs, Complex64::new(1.0, 0.0));
        assert_eq!(
            analytic_charfun(&w, &[0.0]).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn single_prime_window_enumeration() {
        let w = PrimeWindow::new(10.0, 12.0).unwrap();
        assert_eq!(w.primes(), &[11]);
        let t = omega_table(1, 23, Some(w.bounds())).unwrap();
        let big_t = 0.7;
        let s = 1.0 / 11.0;
        let root = libm::sqrt(s);
        let hit = Complex64::new(0.0, big_t * (10.0 / 11.0) / root).exp();
        let miss = Complex64::new(0.0, -big_t * (1.0 / 11.0) / root).exp();
        let expected = hit * (2.0 / 22.0) + miss * (20.0 / 22.0);
        let got = empirical_charfun(22, &w, &[big_t], &[0], &t).unwrap();
        assert!((got - expected).norm() < 1e-14);
    }

    #[test]
    fn analytic_value_at_unit_sum() {
        let v = analytic_charfun_from_sum(1.0, &[1.0]).unwrap();
        let one = 1.0f64;
        let expected = Complex64::from_polar(libm::exp(libm::cos(one) - 1.0), libm::sin(one) - 1.0);
        assert!((v - expected).norm() < 1e-15);
        assert!((v.norm() - libm::exp(-0.4597)).abs() < 1e-4);
    }

    #[test]
    fn empty_window_and_mismatch_rejected() {
        let empty = PrimeWindow::new(10.0, 11.0).unwrap();
        let t = omega_table(1, 50, Some(empty.bounds())).unwrap();
        assert!(matches!(
            empirical_charfun(20, &empty, &[1.0], &[0], &t),
            Err(Error::EmptyWindow { .. })
        ));
        assert!(analytic_charfun(&empty, &[1.0]).is_err());
        let w = PrimeWindow::new(2.0, 30.0).unwrap();
        assert!(empirical_charfun(20, &w, &[1.0], &[0], &t).is_err());
    }

    #[test]
    fn gaussian_check_examples() {
        let g = gaussian_approx_check(100.0, 0.0).unwrap();
        assert_eq!(g.ratio_error, 0.0);
        let g = gaussian_approx_check(100.0, 1.0).unwrap();
        assert!(g.ratio_error <= 0.02, "{}", g.ratio_error);
        assert!(g.decay_regime && g.decay_holds);
    }

    #[test]
    fn cutoffs_invert_at_desk_scale() {
        assert!(matches!(
            asymptotic_cutoffs(1e7, 1),
            Err(Error::InvalidWindow { .. })
        ));
    }

    #[test]
    fn discrepancy_empty_sample() {
        let w = PrimeWindow::new(2.0, 100.0).unwrap();
        let t = omega_table(1, 1001, Some(w.bounds())).unwrap();
        let s = truncation_discrepancy(1000, &w, 0, 1, 0.25, &t).unwrap();
        assert!(s.quantiles.is_none() && s.exceed_fraction.is_none());
    }

    #[test]
    fn discrepancy_vanishes_with_full_window_and_matching_centre() {
        let x = 10_000u64;
        let w = PrimeWindow::new(1.0, x as f64 + 1.0).unwrap();
        let t = omega_table(1, x + 1, Some(w.bounds())).unwrap();
        let s = truncation_discrepancy_centered(x, loglog(x as f64), 500, 3, 0.25, &t).unwrap();
        assert_eq!(s.quantiles.unwrap().max, 0.0);
        assert_eq!(s.exceed_fraction, Some(0.0));
    }
}
