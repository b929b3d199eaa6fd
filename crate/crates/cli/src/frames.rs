//! Frame input conventions: a "video" is a directory of PNG frames
//! processed in lexicographic file-name order, and multi-frame commands
//! can fan work out over a thread pool while keeping output order.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

/// Lists the PNG frames of a directory in lexicographic name order.
/// Errors when the directory holds no frames, so an empty "video" never
/// silently produces an empty summary.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries =
        std::fs::read_dir(dir).with_context(|| format!("frame directory {}", dir.display()))?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let is_png = path
            .extension()
            .map_or(false, |e| e.eq_ignore_ascii_case("png"));
        if path.is_file() && is_png {
            frames.push(path);
        }
    }
    frames.sort();
    if frames.is_empty() {
        bail!("no PNG frames in {}", dir.display());
    }
    Ok(frames)
}

/// Maps `f` over the paths with `jobs` worker threads. Results come back
/// in input order no matter which worker finishes first, so parallel runs
/// print byte-identical output.
pub fn run_ordered<T, F>(paths: &[PathBuf], jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Path) -> Result<T> + Sync,
{
    if jobs <= 1 {
        return paths.iter().map(|p| f(p)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")?;
    pool.install(|| paths.par_iter().map(|p| f(p)).collect())
}
