//! Resumable long sieve runs: one OMGT file per segment plus a JSON
//! manifest `{range, segment_size, completed}`.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use omegaspace_core::omega::Scratch;
use omegaspace_core::{OmegaSegment, OmegaSieve, OmegaTable, WindowBounds};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache;
use crate::par::Parallel;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub range: [u64; 2],
    pub segment_size: u64,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    pub completed: Vec<u64>,
}

fn segment_path(dir: &Path, idx: u64) -> PathBuf {
    dir.join(format!("segment_{idx:08}.omgt"))
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<()> {
    let tmp = dir.join("manifest.json.tmp");
    std::fs::write(&tmp, serde_json::to_string_pretty(m)?)
        .with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, dir.join(MANIFEST)).context("publishing manifest")?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Option<Manifest>> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Ok(None);
    }
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
    ))
}

/// Sieves `[lo, hi)` into `dir`, skipping segments the manifest already
/// lists, then assembles the full table.
pub fn run(
    par: &Parallel,
    lo: u64,
    hi: u64,
    window: Option<WindowBounds>,
    dir: &Path,
) -> Result<OmegaTable> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let fresh = Manifest {
        range: [lo, hi],
        segment_size: par.segment as u64,
        window: window.map(|b| [b.y, b.z]),
        completed: Vec::new(),
    };
    let manifest = match read_manifest(dir)? {
        Some(m) => {
            if m.range != fresh.range
                || m.segment_size != fresh.segment_size
                || m.window != fresh.window
            {
                bail!("checkpoint in {} belongs to a different run", dir.display());
            }
            m
        }
        None => {
            write_manifest(dir, &fresh)?;
            fresh
        }
    };
    let bounds: Vec<(u64, u64)> = OmegaSieve::segment_bounds(lo, hi, par.segment).collect();
    let pending: Vec<u64> = (0..bounds.len() as u64)
        .filter(|i| !manifest.completed.contains(i) || !segment_path(dir, *i).exists())
        .collect();
    let sieve = OmegaSieve::with_budget(hi, &par.budget)?;
    let state = Mutex::new(manifest);
    par.install(|| {
        pending
            .par_iter()
            .try_for_each_init(Scratch::default, |scratch, &idx| -> Result<()> {
                let (a, b) = bounds[idx as usize];
                let mut seg = OmegaSegment::default();
                sieve.sieve_segment(a, b, window, &mut seg, scratch)?;
                let table = OmegaTable::from_segments(a, b, window, [seg])?;
                cache::save(&segment_path(dir, idx), &table)?;
                let mut m = state.lock().expect("manifest lock");
                m.completed.push(idx);
                m.completed.sort_unstable();
                m.completed.dedup();
                write_manifest(dir, &m)
            })
    })?;

    let mut full = Vec::with_capacity((hi - lo) as usize);
    let mut windowed = window.map(|_| Vec::with_capacity((hi - lo) as usize));
    for idx in 0..bounds.len() as u64 {
        let part = cache::load(&segment_path(dir, idx))?;
        if (part.lo(), part.hi()) != bounds[idx as usize] || part.window() != window {
            bail!(
                "segment {idx} in {} does not match the manifest",
                dir.display()
            );
        }
        full.extend_from_slice(part.full_counts());
        if let Some(w) = windowed.as_mut() {
            w.extend_from_slice(part.window_counts());
        }
    }
    Ok(OmegaTable::from_parts(lo, hi, full, window, windowed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use omegaspace_core::omega::omega_table;

    #[test]
    fn resumes_after_interruption() {
        let dir = tempfile::TempDir::new().unwrap();
        let window = Some(WindowBounds::new(7.0, 3_000.0).unwrap());
        let par = Parallel::new(2).with_segment(10_000);
        let expected = omega_table(1, 95_000, window).unwrap();
        assert_eq!(run(&par, 1, 95_000, window, dir.path()).unwrap(), expected);

        // drop two segments as if the run had been killed
        let mut m = read_manifest(dir.path()).unwrap().unwrap();
        assert_eq!(m.completed, (0..10).collect::<Vec<_>>());
        m.completed.retain(|&i| i != 3 && i != 9);
        write_manifest(dir.path(), &m).unwrap();
        std::fs::remove_file(segment_path(dir.path(), 3)).unwrap();
        let untouched = std::fs::metadata(segment_path(dir.path(), 4))
            .unwrap()
            .modified()
            .unwrap();

        assert_eq!(run(&par, 1, 95_000, window, dir.path()).unwrap(), expected);
        assert_eq!(
            read_manifest(dir.path()).unwrap().unwrap().completed.len(),
            10
        );
        let after = std::fs::metadata(segment_path(dir.path(), 4))
            .unwrap()
            .modified()
            .unwrap();
        assert_eq!(untouched, after);
    }

    #[test]
    fn refuses_foreign_manifest() {
        let dir = tempfile::TempDir::new().unwrap();
        let par = Parallel::new(1).with_segment(1_000);
        run(&par, 1, 5_000, None, dir.path()).unwrap();
        assert!(run(&par, 1, 6_000, None, dir.path()).is_err());
        assert!(run(&par.with_segment(2_000), 1, 5_000, None, dir.path()).is_err());
    }

    #[test]
    fn manifest_shape() {
        let m: Manifest =
            serde_json::from_str(r#"{"range":[1,100],"segment_size":10,"completed":[0,2]}"#)
                .unwrap();
        assert_eq!(m.window, None);
        assert_eq!(m.completed, [0, 2]);
    }
}
