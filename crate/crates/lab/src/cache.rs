//! OMGT binary tables and the `OMEGA_CACHE_DIR` cache.
//!
//! Layout, all little-endian: magic `OMGT`, version `u32`, `lo u64`,
//! `hi u64`, window `y f64`, `z f64` (both NaN when no window), then
//! `hi − lo` full counters as `u8`, then `hi − lo` windowed counters when a
//! window is present.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use omegaspace_core::{OmegaTable, WindowBounds};
use thiserror::Error;

use crate::par::Parallel;

pub const MAGIC: &[u8; 4] = b"OMGT";
pub const VERSION: u32 = 1;
pub const CACHE_ENV: &str = "OMEGA_CACHE_DIR";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not an OMGT file (bad magic)")]
    BadMagic,
    #[error("unsupported OMGT version {0}")]
    BadVersion(u32),
    #[error("corrupt OMGT header: {0}")]
    Corrupt(&'static str),
    #[error("no cached table at {0}")]
    Missing(PathBuf),
    #[error(transparent)]
    Core(#[from] omegaspace_core::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn encode<W: Write>(mut w: W, table: &OmegaTable) -> std::io::Result<()> {
    let (y, z) = table.window().map_or((f64::NAN, f64::NAN), |b| (b.y, b.z));
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&table.lo().to_le_bytes())?;
    w.write_all(&table.hi().to_le_bytes())?;
    w.write_all(&y.to_le_bytes())?;
    w.write_all(&z.to_le_bytes())?;
    w.write_all(table.full_counts())?;
    if table.has_window() {
        w.write_all(table.window_counts())?;
    }
    w.flush()
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> std::io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn decode<R: Read>(mut r: R) -> Result<OmegaTable, CacheError> {
    let io = |source| CacheError::Io {
        path: PathBuf::from("<stream>"),
        source,
    };
    if &read_array::<4, _>(&mut r).map_err(io)? != MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = u32::from_le_bytes(read_array(&mut r).map_err(io)?);
    if version != VERSION {
        return Err(CacheError::BadVersion(version));
    }
    let lo = u64::from_le_bytes(read_array(&mut r).map_err(io)?);
    let hi = u64::from_le_bytes(read_array(&mut r).map_err(io)?);
    let y = f64::from_le_bytes(read_array(&mut r).map_err(io)?);
    let z = f64::from_le_bytes(read_array(&mut r).map_err(io)?);
    if hi <= lo || lo == 0 {
        return Err(CacheError::Corrupt("empty or invalid range"));
    }
    let window = match (y.is_nan(), z.is_nan()) {
        (true, true) => None,
        (false, false) => Some(WindowBounds::new(y, z)?),
        _ => return Err(CacheError::Corrupt("half-specified window")),
    };
    let len = usize::try_from(hi - lo).map_err(|_| CacheError::Corrupt("range too large"))?;
    let mut full = vec![0u8; len];
    r.read_exact(&mut full).map_err(io)?;
    let windowed = match window {
        Some(_) => {
            let mut w = vec![0u8; len];
            r.read_exact(&mut w).map_err(io)?;
            Some(w)
        }
        None => None,
    };
    if r.read(&mut [0u8; 1]).map_err(io)? != 0 {
        return Err(CacheError::Corrupt("trailing bytes"));
    }
    Ok(OmegaTable::from_parts(lo, hi, full, window, windowed)?)
}

pub fn save(path: &Path, table: &OmegaTable) -> Result<(), CacheError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = path.with_extension("omgt.tmp");
    let f = File::create(&tmp).map_err(io_err(&tmp))?;
    encode(BufWriter::new(f), table).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn load(path: &Path) -> Result<OmegaTable, CacheError> {
    let f = File::open(path).map_err(io_err(path))?;
    decode(BufReader::new(f)).map_err(|e| match e {
        CacheError::Io { source, .. } => CacheError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// File name for a table over `[lo, hi)` with an optional window.
pub fn cache_file_name(lo: u64, hi: u64, window: Option<WindowBounds>) -> String {
    match window {
        None => format!("omega_{lo}_{hi}_full.omgt"),
        Some(b) => format!(
            "omega_{lo}_{hi}_y{:016x}_z{:016x}.omgt",
            b.y.to_bits(),
            b.z.to_bits()
        ),
    }
}

/// Table lookup backed by `OMEGA_CACHE_DIR` when set.
#[derive(Debug, Clone, Default)]
pub struct TableCache {
    pub dir: Option<PathBuf>,
    /// Fail instead of sieving when the table is not cached.
    pub require: bool,
}

impl TableCache {
    pub fn from_env() -> Self {
        Self {
            dir: std::env::var_os(CACHE_ENV).map(PathBuf::from),
            require: false,
        }
    }

    pub fn get(
        &self,
        par: &Parallel,
        lo: u64,
        hi: u64,
        window: Option<WindowBounds>,
    ) -> Result<OmegaTable, CacheError> {
        let path = self
            .dir
            .as_ref()
            .map(|d| d.join(cache_file_name(lo, hi, window)));
        if let Some(p) = path.as_ref().filter(|p| p.exists()) {
            return load(p);
        }
        if self.require {
            return Err(CacheError::Missing(
                path.unwrap_or_else(|| PathBuf::from(format!("${CACHE_ENV} (unset)"))),
            ));
        }
        let table = par.omega_table(lo, hi, window)?;
        if let Some(p) = path {
            save(&p, &table)?;
        }
        Ok(table)
    }
}
