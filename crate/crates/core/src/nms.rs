//! Offset-threshold non-maximum suppression.
//!
//! Matching a bar template produces a horizontal ridge of strong responses
//! around every real bar, so several candidates can describe the same bar.
//! Suppression walks the candidates in score order: a candidate is marked
//! false when some still-true, higher-ranked candidate sits within the
//! vertical *and* horizontal offset thresholds. Candidates suppressed
//! earlier cannot suppress anyone themselves, so chains of near-duplicates
//! collapse onto their strongest member only.

use crate::error::{Error, Result};
use crate::template::PeakCandidate;

/// Suppression offsets in map pixels. A lower-ranked candidate is dropped
/// when both `|dy| < t_y` and `|dx| < t_x` hold against a surviving
/// higher-ranked one (strict comparisons).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NmsParams {
    pub t_x: u32,
    pub t_y: u32,
}

impl NmsParams {
    /// Defaults derived from the template: half its width horizontally,
    /// one pixel vertically.
    pub fn for_template_width(template_width: u32) -> Self {
        NmsParams {
            t_x: template_width / 2,
            t_y: 1,
        }
    }
}

/// Runs suppression over candidates sorted descending by score and returns
/// the surviving subset in their input order. Passing an unsorted slice is
/// an error: the semantics depend on rank, so silently reordering would
/// hide a caller bug.
pub fn suppress(candidates: &[PeakCandidate], params: &NmsParams) -> Result<Vec<PeakCandidate>> {
    if candidates.windows(2).any(|p| p[0].score < p[1].score) {
        return Err(Error::invalid(
            "nms input must be sorted descending by score",
        ));
    }
    let mut alive = vec![true; candidates.len()];
    for i in 1..candidates.len() {
        for j in 0..i {
            if !alive[j] {
                continue;
            }
            let dy = (candidates[j].y as i64 - candidates[i].y as i64).abs();
            let dx = (candidates[j].x as i64 - candidates[i].x as i64).abs();
            if dy < params.t_y as i64 && dx < params.t_x as i64 {
                alive[i] = false;
                break;
            }
        }
    }
    Ok(candidates
        .iter()
        .zip(&alive)
        .filter(|&(_, &keep)| keep)
        .map(|(c, _)| {
            let mut c = *c;
            c.is_real_detection = true;
            c
        })
        .collect())
}
