//! CSV and JSON emitters. Floats are written with 12 significant digits;
//! CSV is comma-separated, LF-terminated, unquoted.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use omegaspace_core::spacings::SurvivalRow;
use omegaspace_core::{NormalSequence, OmegaTable};
use serde::Serialize;

/// `v` with 12 significant digits, trailing zeros trimmed.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `v` rounded to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    fmt_num(v).parse().unwrap_or(v)
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_omega_csv<W: Write>(mut w: W, table: &OmegaTable) -> std::io::Result<()> {
    writeln!(w, "n,omega,omega_window")?;
    for (i, (&f, &win)) in table
        .full_counts()
        .iter()
        .zip(table.window_counts())
        .enumerate()
    {
        writeln!(w, "{},{f},{win}", table.lo() + i as u64)?;
    }
    w.flush()
}

pub fn write_normal_csv<W: Write>(mut w: W, seq: &NormalSequence) -> std::io::Result<()> {
    writeln!(w, "index,n")?;
    for (i, n) in seq.values.iter().enumerate() {
        writeln!(w, "{},{n}", i + 1)?;
    }
    w.flush()
}

pub fn write_survival_csv<W: Write>(mut w: W, rows: &[SurvivalRow]) -> std::io::Result<()> {
    writeln!(w, "lambda,survival,expected,abs_err")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_num(r.lambda),
            fmt_num(r.survival),
            fmt_num(r.expected),
            fmt_num(r.abs_err)
        )?;
    }
    w.flush()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalSidecar {
    pub x: f64,
    pub delta: f64,
    pub center: f64,
    pub threshold: f64,
    pub rescale: f64,
}

impl From<&omegaspace_core::NormalityContext> for NormalSidecar {
    fn from(c: &omegaspace_core::NormalityContext) -> Self {
        Self {
            x: round12(c.x),
            delta: round12(c.delta),
            center: round12(c.center),
            threshold: round12(c.threshold),
            rescale: round12(c.rescale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharfunRecord {
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_error: f64,
    pub soft_limit_exceeded: bool,
}

impl From<&omegaspace_core::charfunc::CharFunEval> for CharfunRecord {
    fn from(e: &omegaspace_core::charfunc::CharFunEval) -> Self {
        Self {
            lhs_re: round12(e.lhs.re),
            lhs_im: round12(e.lhs.im),
            rhs_re: round12(e.rhs.re),
            rhs_im: round12(e.rhs.im),
            abs_error: round12(e.abs_error),
            soft_limit_exceeded: e.soft_limit_exceeded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRecord {
    pub m: u32,
    pub lambda: f64,
    pub empirical_moment: f64,
    pub poisson_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcheckRecord {
    pub empirical: f64,
    pub main_term: f64,
    pub abs_err: f64,
    pub tau_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EkRecord {
    pub x: u64,
    pub c: f64,
    pub empirical: f64,
    pub gaussian: f64,
    pub abs_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformBaselineRecord {
    pub n: u64,
    pub lambda: f64,
    pub trials: u64,
    pub seed: u64,
    pub empirical: f64,
    pub exact: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeBaselineRecord {
    pub x: u64,
    pub lambda: f64,
    pub gaps: u64,
    pub survival: f64,
    pub expected: f64,
}
