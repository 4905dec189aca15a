//! Command-line front end. Exit codes: 0 success, 1 runtime failure,
//! 2 invalid arguments or parameters.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use omegaspace_core::charfunc::asymptotic_cutoffs;
use omegaspace_core::omega::OmegaHistogram;
use omegaspace_core::spacings::{prime_spacing_survival, uniform_baseline};
use omegaspace_core::{PrimeWindow, WindowBounds};
use serde::Serialize;

use crate::cache::{CacheError, TableCache};
use crate::experiments::{self, Lab};
use crate::format::{self, fmt_num, round12, CharfunRecord, EkRecord, NormalSidecar};
use crate::{checkpoint, Parallel};

#[derive(Debug, Parser)]
#[command(
    name = "omegaspace",
    version,
    about = "Sieve ω(n), δ-normal integers, and their spacing statistics"
)]
pub struct Cli {
    /// Worker threads (defaults to all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for sampled experiments.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Sieve segment length.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub segment: Option<u64>,
    /// Fail instead of sieving when a table is missing from OMEGA_CACHE_DIR.
    #[arg(long, global = true)]
    pub require_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Uniform,
    Primes,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Lower prime cutoff (exclusive).
    #[arg(long, requires = "z", conflicts_with = "asymptotic_cutoffs")]
    pub y: Option<f64>,
    /// Upper prime cutoff (exclusive).
    #[arg(long, requires = "y")]
    pub z: Option<f64>,
    /// Use y = (log x)^{3r}, z = x^{(log log x)^{−3r}}.
    #[arg(long, value_name = "R", alias = "paper-cutoffs")]
    pub asymptotic_cutoffs: Option<u32>,
}

impl WindowArgs {
    fn bounds(&self, x: f64) -> Result<Option<WindowBounds>> {
        Ok(match (self.y, self.z, self.asymptotic_cutoffs) {
            (Some(y), Some(z), _) => Some(WindowBounds::new(y, z)?),
            (_, _, Some(r)) => Some(asymptotic_cutoffs(x, r)?),
            _ => None,
        })
    }
}

#[derive(Debug, Args)]
pub struct NormalArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub delta: f64,
    /// Use log log n instead of log log x for each integer.
    #[arg(long)]
    pub per_integer: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact ω(n) and ω(n;y,z) over a half-open range.
    Sieve {
        /// Half-open range `lo..hi`.
        #[arg(long, value_parser = parse_range)]
        range: (u64, u64),
        #[command(flatten)]
        window: WindowArgs,
        /// Checkpoint directory for resumable runs.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Fraction of n ≤ x with |ω(n) − log log x| < c·√(log log x).
    Ek {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// δ-normal integers up to x·s.
    Normal {
        #[command(flatten)]
        normal: NormalArgs,
    },
    /// Survival function of rescaled δ-normal spacings.
    Spacings {
        #[command(flatten)]
        normal: NormalArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long)]
        i_max: Option<usize>,
    },
    /// Window-count moment against the Poisson moment.
    Moments {
        #[command(flatten)]
        normal: NormalArgs,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        lambda: f64,
    },
    /// Joint characteristic function of windowed counts at shifts.
    Charfun {
        #[arg(long)]
        x: u64,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(
            long = "T",
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        t: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<u64>,
    },
    /// Shifted f-function average against its exact main term.
    Fcheck {
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<u64>,
        #[arg(long)]
        x: u64,
    },
    /// Spacing survival of reference sequences.
    Baseline {
        #[arg(long, value_enum, default_value = "uniform")]
        kind: BaselineKind,
        /// Points per trial (uniform).
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        /// Prime bound (primes).
        #[arg(long, default_value_t = 100_000_000)]
        x: u64,
    },
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or("expected lo..hi")?;
    let lo = a.trim().parse::<u64>().map_err(|e| format!("lo: {e}"))?;
    let hi = b.trim().parse::<u64>().map_err(|e| format!("hi: {e}"))?;
    if lo < 1 || hi <= lo {
        return Err(format!("range {lo}..{hi} must satisfy 1 ≤ lo < hi"));
    }
    Ok((lo, hi))
}

/// Parses `args` (program name first), runs the command, returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            eprintln!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// 2 for parameter errors, 1 for everything else.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    use omegaspace_core::Error as E;
    let core = e.chain().find_map(|c| {
        c.downcast_ref::<E>()
            .or_else(|| match c.downcast_ref::<CacheError>() {
                Some(CacheError::Core(inner)) => Some(inner),
                _ => None,
            })
    });
    match core {
        Some(
            E::InvalidRange { .. }
            | E::RangeTooLarge { .. }
            | E::InvalidWindow { .. }
            | E::EmptyWindow { .. }
            | E::InvalidDelta(_)
            | E::InvalidShifts
            | E::NotPrime(_)
            | E::NotCoprime
            | E::WindowTooLarge { .. }
            | E::InvalidParameter(_),
        ) => 2,
        _ => 1,
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    lab: Lab,
}

impl Ctx<'_> {
    fn format(&self, default: Format) -> Format {
        self.cli.format.unwrap_or(default)
    }

    fn write(&self, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        match &self.cli.out {
            Some(path) => {
                let mut w = format::create(path)?;
                f(&mut w).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                f(&mut lock).context("writing to standard output")
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let text = format::to_json(value);
        self.write(|w| w.write_all(text.as_bytes()))
    }

    fn csv(&self, header: &str, rows: &[Vec<String>]) -> Result<()> {
        self.write(|w| {
            writeln!(w, "{header}")?;
            for r in rows {
                writeln!(w, "{}", r.join(","))?;
            }
            w.flush()
        })
    }

    fn sidecar(&self) -> Option<PathBuf> {
        self.cli.out.as_ref().map(|p| p.with_extension("json"))
    }
}

fn execute(cli: &Cli) -> Result<String> {
    let mut par = match cli.threads {
        Some(0) => bail!(omegaspace_core::Error::InvalidParameter(
            "threads must be positive"
        )),
        Some(t) => Parallel::new(t),
        None => Parallel::default(),
    };
    if let Some(seg) = cli.segment {
        par = par.with_segment(seg as usize);
    }
    let mut cache = TableCache::from_env();
    cache.require = cli.require_cache;
    let ctx = Ctx {
        cli,
        lab: Lab { par, cache },
    };
    match &cli.command {
        Command::Sieve {
            range,
            window,
            checkpoint,
        } => sieve(&ctx, *range, window, checkpoint.as_deref()),
        Command::Ek { x, c } => ek(&ctx, *x, *c),
        Command::Normal { normal } => normal_cmd(&ctx, normal),
        Command::Spacings {
            normal,
            lambda,
            i_max,
        } => spacings(&ctx, normal, lambda, *i_max),
        Command::Moments { normal, m, lambda } => moments(&ctx, normal, *m, *lambda),
        Command::Charfun { x, window, t, b } => charfun(&ctx, *x, window, t, b),
        Command::Fcheck { a, b, x } => fcheck(&ctx, a, b, *x),
        Command::Baseline {
            kind,
            n,
            lambda,
            trials,
            x,
        } => baseline(&ctx, *kind, *n, *lambda, *trials, *x),
    }
}

#[derive(Serialize)]
struct SieveSummary {
    lo: u64,
    hi: u64,
    y: Option<f64>,
    z: Option<f64>,
    omega_sum: u64,
    histogram: Vec<u64>,
}

fn sieve(
    ctx: &Ctx,
    (lo, hi): (u64, u64),
    window: &WindowArgs,
    checkpoint: Option<&Path>,
) -> Result<String> {
    let bounds = window.bounds((hi - 1) as f64)?;
    ctx.lab.par.budget.check(lo, hi)?;
    let table = match checkpoint {
        Some(dir) => checkpoint::run(&ctx.lab.par, lo, hi, bounds, dir)?,
        None => ctx.lab.table(lo, hi, bounds)?,
    };
    let mut hist = OmegaHistogram::default();
    hist.add_counts(table.full_counts());
    match ctx.format(Format::Csv) {
        Format::Csv => ctx.write(|w| format::write_omega_csv(w, &table))?,
        Format::Json => {
            let last = hist
                .counts
                .iter()
                .rposition(|&c| c > 0)
                .map_or(0, |i| i + 1);
            ctx.json(&SieveSummary {
                lo,
                hi,
                y: bounds.map(|b| b.y),
                z: bounds.map(|b| b.z),
                omega_sum: hist.omega_sum(),
                histogram: hist.counts[..last].to_vec(),
            })?
        }
    }
    Ok(format!(
        "sieve: {} integers in [{lo}, {hi}), Σω = {}",
        table.len(),
        hist.omega_sum()
    ))
}

fn ek(ctx: &Ctx, x: u64, c: f64) -> Result<String> {
    let r = ctx.lab.ek(x, c)?;
    let rec = EkRecord {
        x,
        c: round12(c),
        empirical: round12(r.empirical),
        gaussian: round12(r.gaussian),
        abs_gap: round12(r.gap()),
    };
    match ctx.format(Format::Json) {
        Format::Json => ctx.json(&rec)?,
        Format::Csv => ctx.csv(
            "x,c,empirical,gaussian,abs_gap",
            &[vec![
                x.to_string(),
                fmt_num(c),
                fmt_num(r.empirical),
                fmt_num(r.gaussian),
                fmt_num(r.gap()),
            ]],
        )?,
    }
    Ok(format!(
        "ek: x={x} c={} empirical={} gaussian={}",
        fmt_num(c),
        fmt_num(r.empirical),
        fmt_num(r.gaussian)
    ))
}

#[derive(Serialize)]
struct NormalJson {
    #[serde(flatten)]
    meta: NormalSidecar,
    limit: u64,
    count: usize,
    values: Vec<u64>,
}

fn normal_cmd(ctx: &Ctx, args: &NormalArgs) -> Result<String> {
    let nctx = experiments::context(args.x, args.delta, args.per_integer)?;
    let seq = ctx.lab.normal_sequence(&nctx, 0)?;
    let meta = NormalSidecar::from(&nctx);
    match ctx.format(Format::Csv) {
        Format::Csv => {
            ctx.write(|w| format::write_normal_csv(w, &seq))?;
            if let Some(path) = ctx.sidecar() {
                std::fs::write(&path, format::to_json(&meta))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Format::Json => ctx.json(&NormalJson {
            meta,
            limit: seq.limit,
            count: seq.len(),
            values: seq.values.clone(),
        })?,
    }
    Ok(format!(
        "normal: {} δ-normal integers up to {}",
        seq.len(),
        seq.limit
    ))
}

#[derive(Serialize)]
struct SurvivalJson {
    x: f64,
    delta: f64,
    count: usize,
    i_max: usize,
    mean_spacing: Option<f64>,
    rows: Vec<SurvivalRowJson>,
}

#[derive(Serialize)]
struct SurvivalRowJson {
    lambda: f64,
    survival: f64,
    expected: f64,
    abs_err: f64,
}

fn spacings(ctx: &Ctx, args: &NormalArgs, lambdas: &[f64], i_max: Option<usize>) -> Result<String> {
    let nctx = experiments::context(args.x, args.delta, args.per_integer)?;
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        bail!(omegaspace_core::Error::InvalidParameter(
            "lambda must be positive"
        ));
    }
    let report = ctx.lab.survival(&nctx, lambdas, i_max)?;
    match ctx.format(Format::Csv) {
        Format::Csv => ctx.write(|w| format::write_survival_csv(w, &report.rows))?,
        Format::Json => ctx.json(&SurvivalJson {
            x: round12(report.x),
            delta: round12(report.delta),
            count: report.count,
            i_max: report.i_max,
            mean_spacing: report.mean_spacing.map(round12),
            rows: report
                .rows
                .iter()
                .map(|r| SurvivalRowJson {
                    lambda: round12(r.lambda),
                    survival: round12(r.survival),
                    expected: round12(r.expected),
                    abs_err: round12(r.abs_err),
                })
                .collect(),
        })?,
    }
    Ok(format!(
        "spacings: {} δ-normal integers, i_max={}, mean spacing {}",
        report.count,
        report.i_max,
        report.mean_spacing.map_or("n/a".into(), fmt_num)
    ))
}

fn moments(ctx: &Ctx, args: &NormalArgs, m: u32, lambda: f64) -> Result<String> {
    let nctx = experiments::context(args.x, args.delta, args.per_integer)?;
    if m == 0 {
        bail!(omegaspace_core::Error::InvalidParameter(
            "moment order must be at least 1"
        ));
    }
    if !(lambda > 0.0) {
        bail!(omegaspace_core::Error::InvalidParameter(
            "lambda must be positive"
        ));
    }
    let rec = ctx.lab.moment(&nctx, m, lambda)?.record();
    match ctx.format(Format::Json) {
        Format::Json => ctx.json(&rec)?,
        Format::Csv => ctx.csv(
            "m,lambda,empirical_moment,poisson_moment",
            &[vec![
                rec.m.to_string(),
                fmt_num(rec.lambda),
                fmt_num(rec.empirical_moment),
                fmt_num(rec.poisson_moment),
            ]],
        )?,
    }
    Ok(format!(
        "moments: m={m} λ={} empirical={} poisson={}",
        fmt_num(lambda),
        fmt_num(rec.empirical_moment),
        fmt_num(rec.poisson_moment)
    ))
}

fn charfun(ctx: &Ctx, x: u64, window: &WindowArgs, t: &[f64], b: &[u64]) -> Result<String> {
    let bounds = window
        .bounds(x as f64)?
        .ok_or(omegaspace_core::Error::InvalidParameter(
            "charfun needs --y/--z or --asymptotic-cutoffs",
        ))?;
    if t.len() != b.len() {
        bail!(omegaspace_core::Error::InvalidParameter(
            "--T and --b must have equal length"
        ));
    }
    omegaspace_core::normality::validate_shifts(b)?;
    if x == 0 {
        bail!(omegaspace_core::Error::InvalidParameter(
            "x must be positive"
        ));
    }
    let pw = PrimeWindow::with_budget(bounds.y, bounds.z, &ctx.lab.par.budget)?;
    pw.nonzero_sum()?;
    let eval = ctx.lab.charfun(x, &pw, t, b)?;
    let rec = CharfunRecord::from(&eval);
    match ctx.format(Format::Json) {
        Format::Json => ctx.json(&rec)?,
        Format::Csv => ctx.csv(
            "lhs_re,lhs_im,rhs_re,rhs_im,abs_error,soft_limit_exceeded",
            &[vec![
                fmt_num(eval.lhs.re),
                fmt_num(eval.lhs.im),
                fmt_num(eval.rhs.re),
                fmt_num(eval.rhs.im),
                fmt_num(eval.abs_error),
                eval.soft_limit_exceeded.to_string(),
            ]],
        )?,
    }
    Ok(format!(
        "charfun: x={x} S={} |lhs−rhs|={}",
        fmt_num(eval.reciprocal_sum),
        fmt_num(eval.abs_error)
    ))
}

fn fcheck(ctx: &Ctx, a: &[u64], b: &[u64], x: u64) -> Result<String> {
    if a.len() != b.len() {
        bail!(omegaspace_core::Error::InvalidParameter(
            "--a and --b must have equal length"
        ));
    }
    if x == 0 {
        bail!(omegaspace_core::Error::InvalidParameter(
            "x must be positive"
        ));
    }
    let report = experiments::fcheck(x, a, b)?;
    let rec = report.record();
    match ctx.format(Format::Json) {
        Format::Json => ctx.json(&rec)?,
        Format::Csv => ctx.csv(
            "empirical,main_term,abs_err,tau_bound",
            &[vec![
                fmt_num(rec.empirical),
                fmt_num(rec.main_term),
                fmt_num(rec.abs_err),
                fmt_num(rec.tau_bound),
            ]],
        )?,
    }
    Ok(format!(
        "fcheck: x={x} |empirical − main|={} bound={}",
        fmt_num(report.abs_err),
        fmt_num(report.tau_bound)
    ))
}

fn baseline(
    ctx: &Ctx,
    kind: BaselineKind,
    n: u64,
    lambda: f64,
    trials: u64,
    x: u64,
) -> Result<String> {
    match kind {
        BaselineKind::Uniform => {
            let r = uniform_baseline(n, lambda, trials, ctx.cli.seed)?;
            let rec = format::UniformBaselineRecord {
                n,
                lambda: round12(lambda),
                trials,
                seed: ctx.cli.seed,
                empirical: round12(r.empirical),
                exact: round12(r.exact),
                std_err: round12(r.std_err),
            };
            match ctx.format(Format::Json) {
                Format::Json => ctx.json(&rec)?,
                Format::Csv => ctx.csv(
                    "n,lambda,trials,seed,empirical,exact,std_err",
                    &[vec![
                        n.to_string(),
                        fmt_num(lambda),
                        trials.to_string(),
                        ctx.cli.seed.to_string(),
                        fmt_num(r.empirical),
                        fmt_num(r.exact),
                        fmt_num(r.std_err),
                    ]],
                )?,
            }
            Ok(format!(
                "baseline uniform: empirical={} exact={} se={}",
                fmt_num(r.empirical),
                fmt_num(r.exact),
                fmt_num(r.std_err)
            ))
        }
        BaselineKind::Primes => {
            ctx.lab.par.budget.check(2, x.saturating_add(1))?;
            let r = prime_spacing_survival(x, lambda)?;
            let rec = format::PrimeBaselineRecord {
                x,
                lambda: round12(lambda),
                gaps: r.gaps,
                survival: round12(r.survival),
                expected: round12(r.expected),
            };
            match ctx.format(Format::Json) {
                Format::Json => ctx.json(&rec)?,
                Format::Csv => ctx.csv(
                    "x,lambda,gaps,survival,expected",
                    &[vec![
                        x.to_string(),
                        fmt_num(lambda),
                        r.gaps.to_string(),
                        fmt_num(r.survival),
                        fmt_num(r.expected),
                    ]],
                )?,
            }
            Ok(format!(
                "baseline primes: {} gaps, survival={} e^-λ={}",
                r.gaps,
                fmt_num(r.survival),
                fmt_num(r.expected)
            ))
        }
    }
}
