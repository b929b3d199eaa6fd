//! Blood bar template matching.
//!
//! The detector slides a masked grayscale template of the bar chrome over
//! the normalized frame and computes, at every placement, the normalized
//! cross-correlation restricted to the mask. Mask-0 pixels (the HP fill
//! and the level digit box) never influence the match, so the same
//! template finds full, damaged and empty bars.
//!
//! Peaks are picked with a square maximum filter, ranked by a contrast
//! score that rewards peaks standing clear of their neighborhood, and
//! finally thresholded.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::raster::{maximum_filter, to_grayscale, MatchMap, RasterImage};

/// Width of the built-in blood bar template in normalized-frame pixels.
pub const BAR_WIDTH: u32 = 64;
/// Height of the built-in blood bar template.
pub const BAR_HEIGHT: u32 = 16;

/// HP fill area of the built-in template, in template coordinates.
pub(crate) const FILL_RECT: Rect = Rect {
    x: 13,
    y: 3,
    w: 50,
    h: 10,
};
/// Level digit box of the built-in template.
pub(crate) const DIGIT_RECT: Rect = Rect {
    x: 1,
    y: 3,
    w: 11,
    h: 10,
};

const OUTER_LINE: u8 = 215;
const GAP_LINE: u8 = 90;
const INNER_LINE: u8 = 170;
const DIGIT_BG: u8 = 55;
const FILL_BG: u8 = 70;

/// Gray value and mask flag of one pixel of the built-in bar chrome.
/// Mask-1 pixels are the six full-width horizontal lines plus the three
/// vertical struts (left edge, digit/fill divider, right edge); the fill
/// area and the digit box are mask-0 because their content varies in game.
pub(crate) fn builtin_pixel(x: u32, y: u32) -> (u8, bool) {
    debug_assert!(x < BAR_WIDTH && y < BAR_HEIGHT);
    match y {
        0 | 15 => (OUTER_LINE, true),
        1 | 14 => (GAP_LINE, true),
        2 | 13 => (INNER_LINE, true),
        _ => match x {
            0 | 12 | 63 => (OUTER_LINE, true),
            1..=11 => (DIGIT_BG, false),
            _ => (FILL_BG, false),
        },
    }
}

/// A local maximum of the match map, with its raw matched value and the
/// contrast score assigned by [`rank_and_score`]. `is_real_detection` is
/// the suppression flag toggled by non-maximum suppression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakCandidate {
    pub x: u32,
    pub y: u32,
    pub value: f32,
    pub score: f32,
    pub is_real_detection: bool,
}

impl PeakCandidate {
    pub fn new(x: u32, y: u32, value: f32) -> Self {
        PeakCandidate {
            x,
            y,
            value,
            score: 0.0,
            is_real_detection: true,
        }
    }
}

/// Parameters for peak ranking: `score = alpha * v0 + beta * mean(v0 - vi)`
/// over the maximum-filter window (center excluded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    pub alpha: f64,
    pub beta: f64,
    /// Maximum-filter radius in pixels; the scoring window is the same
    /// (2r+1)^2 square.
    pub radius: u32,
    /// At most this many candidates survive ranking.
    pub top_k: usize,
    /// Candidates scoring below this are dropped.
    pub score_threshold: f64,
}

impl Default for ScoreParams {
    /// Defaults calibrated against the synthetic corpus (see
    /// `examples/calibrate.rs`): true bars score >= 4.98 there while the
    /// strongest background candidate stays under 2.37, so 3.5 sits in
    /// the middle of the gap.
    fn default() -> Self {
        ScoreParams {
            alpha: 1.0,
            beta: 4.0,
            radius: 12,
            top_k: 20,
            score_threshold: 3.5,
        }
    }
}

impl ScoreParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid("score alpha must be finite and >= 0"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::invalid("score beta must be finite and >= 0"));
        }
        if self.alpha + self.beta <= 0.0 {
            return Err(Error::invalid("alpha + beta must be positive"));
        }
        if self.radius == 0 {
            return Err(Error::invalid("score radius must be >= 1"));
        }
        if self.top_k == 0 {
            return Err(Error::invalid("top_k must be >= 1"));
        }
        if !self.score_threshold.is_finite() {
            return Err(Error::invalid("score threshold must be finite"));
        }
        Ok(())
    }
}

/// Horizontal segment of template pixels with one gray value.
#[derive(Debug, Clone, Copy)]
struct HRun {
    y: u32,
    x0: u32,
    /// Exclusive.
    x1: u32,
    value: f64,
}

/// Vertical segment of template pixels with one gray value.
#[derive(Debug, Clone, Copy)]
struct VRun {
    x: u32,
    y0: u32,
    /// Exclusive.
    y1: u32,
    value: f64,
}

/// Precomputed masked-template statistics and a run decomposition of the
/// mask that makes the sliding masked sums O(runs) per placement instead
/// of O(mask pixels).
#[derive(Debug, Clone)]
struct Kernel {
    h_runs: Vec<HRun>,
    v_runs: Vec<VRun>,
    mask_count: f64,
    sum_t: f64,
    /// sqrt(sum((T - mean_T)^2)) over the mask; 0 for a constant template.
    denom_t: f64,
}

impl Kernel {
    fn build(image: &RasterImage, mask: &[bool]) -> Kernel {
        let (w, h) = (image.width(), image.height());

        // Maximal constant-value horizontal runs of masked pixels.
        let mut h_runs = Vec::new();
        for y in 0..h {
            let mut x = 0;
            while x < w {
                if !mask[(y * w + x) as usize] {
                    x += 1;
                    continue;
                }
                let value = image.get(x, y, 0);
                let x0 = x;
                while x < w && mask[(y * w + x) as usize] && image.get(x, y, 0) == value {
                    x += 1;
                }
                h_runs.push(HRun {
                    y,
                    x0,
                    x1: x,
                    value: value as f64,
                });
            }
        }

        // Stack single-pixel runs of equal value and column into vertical
        // runs; isolated singles stay horizontal.
        let mut singles: Vec<HRun> = h_runs
            .iter()
            .copied()
            .filter(|r| r.x1 - r.x0 == 1)
            .collect();
        h_runs.retain(|r| r.x1 - r.x0 > 1);
        singles.sort_by_key(|r| (r.x0, r.y));
        let mut v_runs: Vec<VRun> = Vec::new();
        for run in singles {
            if let Some(last) = v_runs.last_mut() {
                if last.x == run.x0 && last.y1 == run.y && last.value == run.value {
                    last.y1 += 1;
                    continue;
                }
            }
            v_runs.push(VRun {
                x: run.x0,
                y0: run.y,
                y1: run.y + 1,
                value: run.value,
            });
        }
        // Singles that found no partner go back to the horizontal list.
        v_runs.retain(|v| {
            if v.y1 - v.y0 > 1 {
                true
            } else {
                h_runs.push(HRun {
                    y: v.y0,
                    x0: v.x,
                    x1: v.x + 1,
                    value: v.value,
                });
                false
            }
        });

        let mut mask_count = 0f64;
        let mut sum_t = 0f64;
        let mut sum_t2 = 0f64;
        for y in 0..h {
            for x in 0..w {
                if mask[(y * w + x) as usize] {
                    let t = image.get(x, y, 0) as f64;
                    mask_count += 1.0;
                    sum_t += t;
                    sum_t2 += t * t;
                }
            }
        }
        let var_t = sum_t2 - sum_t * sum_t / mask_count;
        Kernel {
            h_runs,
            v_runs,
            mask_count,
            sum_t,
            denom_t: if var_t > 0.0 { var_t.sqrt() } else { 0.0 },
        }
    }
}

/// The blood bar template: a grayscale image of the bar chrome plus a
/// binary mask selecting the pixels that are stable in game (mask-1) as
/// opposed to the HP fill and level digit (mask-0).
#[derive(Debug, Clone)]
pub struct BloodBarTemplate {
    image: RasterImage,
    mask: Vec<bool>,
    fill_region: Option<Rect>,
    kernel: Kernel,
}

impl BloodBarTemplate {
    /// Builds a template from an image and a mask raster of identical
    /// dimensions. Any nonzero mask pixel counts as 1. Color inputs are
    /// converted to grayscale.
    pub fn new(image: RasterImage, mask_image: &RasterImage) -> Result<Self> {
        if mask_image.width() != image.width() || mask_image.height() != image.height() {
            return Err(Error::invalid(format!(
                "mask is {}x{} but template is {}x{}",
                mask_image.width(),
                mask_image.height(),
                image.width(),
                image.height()
            )));
        }
        let image = to_grayscale(&image);
        let mask_gray = to_grayscale(mask_image);
        let mask: Vec<bool> = mask_gray.pixels().iter().map(|&p| p != 0).collect();
        if !mask.iter().any(|&m| m) {
            return Err(Error::invalid("template mask has no usable pixels"));
        }
        let fill_region = largest_unmasked_region(&mask, image.width(), image.height());
        let kernel = Kernel::build(&image, &mask);
        Ok(BloodBarTemplate {
            image,
            mask,
            fill_region,
            kernel,
        })
    }

    /// The built-in bar template shipped with the crate. Identical to the
    /// committed `template.png` / `template_mask.png` asset pair.
    pub fn builtin() -> Self {
        let mut image = RasterImage::filled(BAR_WIDTH, BAR_HEIGHT, 1, 0);
        let mut mask_img = RasterImage::filled(BAR_WIDTH, BAR_HEIGHT, 1, 0);
        for y in 0..BAR_HEIGHT {
            for x in 0..BAR_WIDTH {
                let (value, masked) = builtin_pixel(x, y);
                image.set(x, y, 0, value);
                mask_img.set(x, y, 0, if masked { 255 } else { 0 });
            }
        }
        BloodBarTemplate::new(image, &mask_img).expect("builtin template is valid")
    }

    /// Loads a template from a PNG pair.
    pub fn from_png_pair(
        image_path: impl AsRef<Path>,
        mask_path: impl AsRef<Path>,
    ) -> Result<Self> {
        let image = RasterImage::load_png(image_path)?;
        let mask = RasterImage::load_png(mask_path)?;
        BloodBarTemplate::new(image, &mask)
    }

    /// Writes the template as a PNG pair (mask pixels become 0 or 255).
    pub fn save_png_pair(
        &self,
        image_path: impl AsRef<Path>,
        mask_path: impl AsRef<Path>,
    ) -> Result<()> {
        self.image.save_png(image_path)?;
        self.mask_image().save_png(mask_path)
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    pub fn image(&self) -> &RasterImage {
        &self.image
    }

    #[inline]
    pub fn mask_at(&self, x: u32, y: u32) -> bool {
        self.mask[(y * self.image.width() + x) as usize]
    }

    /// The mask as a 0/255 raster.
    pub fn mask_image(&self) -> RasterImage {
        let pixels = self.mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
        RasterImage::new(self.image.width(), self.image.height(), 1, pixels)
            .expect("mask dims match image")
    }

    /// Bounding box of the largest mask-0 connected region — the HP fill
    /// area. `None` for templates whose mask covers every pixel.
    pub fn fill_region(&self) -> Option<Rect> {
        self.fill_region
    }
}

/// Bounding box of the largest (by pixel count) 4-connected mask-0
/// component. Ties go to the component encountered first in row-major
/// order.
fn largest_unmasked_region(mask: &[bool], w: u32, h: u32) -> Option<Rect> {
    let (w, h) = (w as usize, h as usize);
    let mut seen = vec![false; w * h];
    let mut best: Option<(usize, Rect)> = None;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if mask[start] || seen[start] {
            continue;
        }
        let mut count = 0usize;
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (w, h, 0usize, 0usize);
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            count += 1;
            let (x, y) = (idx % w, idx / w);
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            let mut visit = |n: usize| {
                if !mask[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if x > 0 {
                visit(idx - 1);
            }
            if x + 1 < w {
                visit(idx + 1);
            }
            if y > 0 {
                visit(idx - w);
            }
            if y + 1 < h {
                visit(idx + w);
            }
        }
        let rect = Rect::new(
            min_x as i32,
            min_y as i32,
            (max_x - min_x + 1) as u32,
            (max_y - min_y + 1) as u32,
        );
        if best.map_or(true, |(c, _)| count > c) {
            best = Some((count, rect));
        }
    }
    best.map(|(_, r)| r)
}

/// Cumulative row sums: `R[y][x]` = sum of the first `x` pixels of row `y`
/// (and the same for squared pixels). Plus cumulative column sums stored
/// row-major: `C[j][x]` = sum of pixels `(x, 0..j)`.
struct Integrals {
    row1: Vec<u32>,
    row2: Vec<u32>,
    col1: Vec<u32>,
    col2: Vec<u32>,
    row_stride: usize,
    width: usize,
}

impl Integrals {
    fn build(frame: &RasterImage) -> Integrals {
        let (w, h) = (frame.width() as usize, frame.height() as usize);
        let row_stride = w + 1;
        let mut row1 = vec![0u32; row_stride * h];
        let mut row2 = vec![0u32; row_stride * h];
        for y in 0..h {
            let src = frame.row(y as u32);
            let r1 = &mut row1[y * row_stride..(y + 1) * row_stride];
            let r2 = &mut row2[y * row_stride..(y + 1) * row_stride];
            let (mut acc1, mut acc2) = (0u32, 0u32);
            for x in 0..w {
                let p = src[x] as u32;
                acc1 += p;
                acc2 += p * p;
                r1[x + 1] = acc1;
                r2[x + 1] = acc2;
            }
        }
        let mut col1 = vec![0u32; w * (h + 1)];
        let mut col2 = vec![0u32; w * (h + 1)];
        for y in 0..h {
            let src = frame.row(y as u32);
            let (prev1, next1) = col1.split_at_mut((y + 1) * w);
            let (prev2, next2) = col2.split_at_mut((y + 1) * w);
            let prev1 = &prev1[y * w..];
            let prev2 = &prev2[y * w..];
            for x in 0..w {
                let p = src[x] as u32;
                next1[x] = prev1[x] + p;
                next2[x] = prev2[x] + p * p;
            }
        }
        Integrals {
            row1,
            row2,
            col1,
            col2,
            row_stride,
            width: w,
        }
    }
}

/// Masked normalized cross-correlation of a grayscale frame against the
/// template. The output has `(frame_w - template_w + 1)` columns and the
/// analogous number of rows; the value at `(x, y)` is the correlation of
/// the template placed with its top-left corner at `(x, y)`, restricted to
/// mask-1 pixels. Values lie in [-1, 1]; placements where either the frame
/// window or the template has zero variance over the mask yield 0.
pub fn masked_match(frame: &RasterImage, template: &BloodBarTemplate) -> Result<MatchMap> {
    if frame.channels() != 1 {
        return Err(Error::invalid("masked_match expects a grayscale frame"));
    }
    if frame.width() < template.width() || frame.height() < template.height() {
        return Err(Error::invalid(format!(
            "frame {}x{} is smaller than the {}x{} template",
            frame.width(),
            frame.height(),
            template.width(),
            template.height()
        )));
    }
    let out_w = (frame.width() - template.width() + 1) as usize;
    let out_h = (frame.height() - template.height() + 1) as usize;
    let kernel = &template.kernel;
    if kernel.denom_t <= 0.0 {
        // Constant template over the mask correlates with nothing.
        return Ok(MatchMap::zeros(out_w as u32, out_h as u32));
    }

    let integrals = Integrals::build(frame);
    let m = kernel.mask_count;
    let inv_m = 1.0 / m;

    let mut values = vec![0.0f32; out_w * out_h];
    let mut s1 = vec![0.0f64; out_w];
    let mut s2 = vec![0.0f64; out_w];
    let mut sp = vec![0.0f64; out_w];
    for y in 0..out_h {
        s1.fill(0.0);
        s2.fill(0.0);
        sp.fill(0.0);
        for run in &kernel.h_runs {
            let row = y + run.y as usize;
            let base1 = &integrals.row1[row * integrals.row_stride..];
            let base2 = &integrals.row2[row * integrals.row_stride..];
            let (a, b) = (run.x0 as usize, run.x1 as usize);
            let value = run.value;
            for x in 0..out_w {
                let d1 = (base1[x + b] - base1[x + a]) as f64;
                let d2 = (base2[x + b] - base2[x + a]) as f64;
                s1[x] += d1;
                s2[x] += d2;
                sp[x] += value * d1;
            }
        }
        for run in &kernel.v_runs {
            let top = y + run.y0 as usize;
            let bottom = y + run.y1 as usize;
            let vx = run.x as usize;
            let top1 = &integrals.col1[top * integrals.width + vx..];
            let bottom1 = &integrals.col1[bottom * integrals.width + vx..];
            let top2 = &integrals.col2[top * integrals.width + vx..];
            let bottom2 = &integrals.col2[bottom * integrals.width + vx..];
            let value = run.value;
            for x in 0..out_w {
                let d1 = (bottom1[x] - top1[x]) as f64;
                let d2 = (bottom2[x] - top2[x]) as f64;
                s1[x] += d1;
                s2[x] += d2;
                sp[x] += value * d1;
            }
        }
        let dst = &mut values[y * out_w..(y + 1) * out_w];
        for x in 0..out_w {
            let mean_f = s1[x] * inv_m;
            let var_f = s2[x] - s1[x] * mean_f;
            let numerator = sp[x] - mean_f * kernel.sum_t;
            dst[x] = if var_f > 1e-9 {
                let v = numerator / (var_f.sqrt() * kernel.denom_t);
                v.clamp(-1.0, 1.0) as f32
            } else {
                0.0
            };
        }
    }
    MatchMap::from_values(out_w as u32, out_h as u32, values)
}

/// Positions where the maximum filter leaves the map unchanged, i.e.
/// pixels that are the maximum of their own (2r+1)^2 window. Ties inside a
/// window all qualify, so plateaus produce one candidate per pixel.
pub fn find_local_maxima(map: &MatchMap, radius: u32) -> Vec<PeakCandidate> {
    let filtered = maximum_filter(map, radius);
    let mut out = Vec::new();
    for y in 0..map.height() {
        let src = map.row(y);
        let max = filtered.row(y);
        for x in 0..map.width() {
            if src[x as usize] == max[x as usize] {
                out.push(PeakCandidate::new(x, y, src[x as usize]));
            }
        }
    }
    out
}

fn by_value_desc(a: &PeakCandidate, b: &PeakCandidate) -> std::cmp::Ordering {
    b.value
        .total_cmp(&a.value)
        .then_with(|| (a.y, a.x).cmp(&(b.y, b.x)))
}

fn by_score_desc(a: &PeakCandidate, b: &PeakCandidate) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| (a.y, a.x).cmp(&(b.y, b.x)))
}

/// Keeps the `top_k` candidates with the highest raw match value and
/// assigns each the contrast score
/// `alpha * v0 + beta * mean(v0 - vi)`,
/// where the `vi` are the other map values inside the candidate's
/// (2r+1)^2 window (clipped at map borders). The result is sorted by score,
/// descending; all ties are broken by row-major position so the ordering
/// is deterministic.
pub fn rank_and_score(
    map: &MatchMap,
    mut candidates: Vec<PeakCandidate>,
    params: &ScoreParams,
) -> Vec<PeakCandidate> {
    debug_assert!(params.validate().is_ok());
    if candidates.len() > params.top_k {
        candidates.select_nth_unstable_by(params.top_k - 1, by_value_desc);
        candidates.truncate(params.top_k);
    }
    candidates.sort_unstable_by(by_value_desc);

    let r = params.radius as i64;
    for cand in &mut candidates {
        let x0 = (cand.x as i64 - r).max(0) as u32;
        let x1 = ((cand.x as i64 + r).min(map.width() as i64 - 1)) as u32;
        let y0 = (cand.y as i64 - r).max(0) as u32;
        let y1 = ((cand.y as i64 + r).min(map.height() as i64 - 1)) as u32;
        let mut sum = 0.0f64;
        for y in y0..=y1 {
            let row = map.row(y);
            for x in x0..=x1 {
                sum += row[x as usize] as f64;
            }
        }
        let count = (x1 - x0 + 1) as i64 * (y1 - y0 + 1) as i64;
        let n = count - 1;
        let v0 = cand.value as f64;
        let contrast = if n > 0 {
            (n as f64 * v0 - (sum - v0)) / n as f64
        } else {
            0.0
        };
        cand.score = (params.alpha * v0 + params.beta * contrast) as f32;
    }
    candidates.sort_unstable_by(by_score_desc);
    candidates
}

/// Drops candidates scoring below the threshold, preserving order.
pub fn threshold_candidates(
    candidates: Vec<PeakCandidate>,
    params: &ScoreParams,
) -> Vec<PeakCandidate> {
    candidates
        .into_iter()
        .filter(|c| c.score as f64 >= params.score_threshold)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct per-placement masked NCC, the independent oracle for
    /// `masked_match`.
    fn naive_masked_match(frame: &RasterImage, template: &BloodBarTemplate) -> MatchMap {
        let (tw, th) = (template.width(), template.height());
        let out_w = frame.width() - tw + 1;
        let out_h = frame.height() - th + 1;
        let mut out = MatchMap::zeros(out_w, out_h);
        let masked: Vec<(u32, u32, f64)> = (0..th)
            .flat_map(|v| (0..tw).map(move |u| (u, v)))
            .filter(|&(u, v)| template.mask_at(u, v))
            .map(|(u, v)| (u, v, template.image().get(u, v, 0) as f64))
            .collect();
        let m = masked.len() as f64;
        let mean_t = masked.iter().map(|&(_, _, t)| t).sum::<f64>() / m;
        let var_t: f64 = masked.iter().map(|&(_, _, t)| (t - mean_t).powi(2)).sum();
        for y in 0..out_h {
            for x in 0..out_w {
                let mean_f = masked
                    .iter()
                    .map(|&(u, v, _)| frame.get(x + u, y + v, 0) as f64)
                    .sum::<f64>()
                    / m;
                let mut num = 0.0;
                let mut var_f = 0.0;
                for &(u, v, t) in &masked {
                    let f = frame.get(x + u, y + v, 0) as f64 - mean_f;
                    num += f * (t - mean_t);
                    var_f += f * f;
                }
                let denom = (var_f * var_t).sqrt();
                let value = if denom > 1e-9 { num / denom } else { 0.0 };
                out.set(x, y, value.clamp(-1.0, 1.0) as f32);
            }
        }
        out
    }

    fn random_frame(rng: &mut impl Rng, w: u32, h: u32) -> RasterImage {
        let pixels = (0..w as usize * h as usize).map(|_| rng.gen()).collect();
        RasterImage::new(w, h, 1, pixels).unwrap()
    }

    fn random_template(rng: &mut impl Rng, w: u32, h: u32) -> BloodBarTemplate {
        loop {
            let image = random_frame(rng, w, h);
            let mask_pixels: Vec<u8> = (0..w as usize * h as usize)
                .map(|_| if rng.gen_bool(0.6) { 255 } else { 0 })
                .collect();
            let mask = RasterImage::new(w, h, 1, mask_pixels).unwrap();
            if let Ok(t) = BloodBarTemplate::new(image, &mask) {
                return t;
            }
        }
    }

    /// Pastes the template's masked pixels into a frame at (x, y).
    fn paste(frame: &mut RasterImage, template: &BloodBarTemplate, x: u32, y: u32) {
        for v in 0..template.height() {
            for u in 0..template.width() {
                frame.set(x + u, y + v, 0, template.image().get(u, v, 0));
            }
        }
    }

    #[test]
    fn builtin_template_shape_and_fill_region() {
        let t = BloodBarTemplate::builtin();
        assert_eq!((t.width(), t.height()), (BAR_WIDTH, BAR_HEIGHT));
        assert_eq!(t.fill_region(), Some(FILL_RECT));
        // The digit box must stay disconnected from the fill area.
        assert!(t.mask_at(12, 8));
    }

    #[test]
    fn template_rejects_mismatched_mask_dims() {
        let image = RasterImage::filled(8, 4, 1, 100);
        let mask = RasterImage::filled(8, 5, 1, 255);
        assert!(BloodBarTemplate::new(image, &mask).is_err());
    }

    #[test]
    fn template_rejects_empty_mask() {
        let image = RasterImage::filled(8, 4, 1, 100);
        let mask = RasterImage::filled(8, 4, 1, 0);
        assert!(BloodBarTemplate::new(image, &mask).is_err());
    }

    #[test]
    fn png_pair_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (img_path, mask_path) = (dir.path().join("t.png"), dir.path().join("m.png"));
        let t = BloodBarTemplate::builtin();
        t.save_png_pair(&img_path, &mask_path).unwrap();
        let loaded = BloodBarTemplate::from_png_pair(&img_path, &mask_path).unwrap();
        assert_eq!(loaded.image(), t.image());
        assert_eq!(loaded.mask_image(), t.mask_image());
    }

    #[test]
    fn self_match_peaks_at_paste_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let template = BloodBarTemplate::builtin();
        let mut frame = random_frame(&mut rng, 200, 80);
        paste(&mut frame, &template, 57, 31);
        let map = masked_match(&frame, &template).unwrap();
        let mut best = (0, 0, f32::NEG_INFINITY);
        for y in 0..map.height() {
            for x in 0..map.width() {
                if map.at(x, y) > best.2 {
                    best = (x, y, map.at(x, y));
                }
            }
        }
        assert_eq!((best.0, best.1), (57, 31));
        assert!(best.2 > 0.999, "self match value {}", best.2);
    }

    #[test]
    fn two_pastes_give_two_local_maxima() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let template = BloodBarTemplate::builtin();
        let mut frame = random_frame(&mut rng, 320, 120);
        paste(&mut frame, &template, 20, 10);
        paste(&mut frame, &template, 200, 80);
        let map = masked_match(&frame, &template).unwrap();
        let maxima = find_local_maxima(&map, 12);
        let positions: Vec<(u32, u32)> = maxima.iter().map(|c| (c.x, c.y)).collect();
        assert!(positions.contains(&(20, 10)));
        assert!(positions.contains(&(200, 80)));
    }

    #[test]
    fn uniform_frame_matches_nothing() {
        let template = BloodBarTemplate::builtin();
        let frame = RasterImage::filled(200, 60, 1, 128);
        let map = masked_match(&frame, &template).unwrap();
        assert!(map.values().iter().all(|&v| v == 0.0));
        let ranked = rank_and_score(&map, find_local_maxima(&map, 12), &ScoreParams::default());
        assert!(threshold_candidates(ranked, &ScoreParams::default()).is_empty());
    }

    #[test]
    fn undersized_frame_is_error() {
        let template = BloodBarTemplate::builtin();
        let frame = RasterImage::filled(40, 10, 1, 0);
        assert!(masked_match(&frame, &template).is_err());
    }

    #[test]
    fn fast_match_equals_naive_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for case in 0..8 {
            let (tw, th) = (rng.gen_range(3..10), rng.gen_range(2..7));
            let template = random_template(&mut rng, tw, th);
            let (fw, fh) = (rng.gen_range(20..40), rng.gen_range(12..30));
            let frame = random_frame(&mut rng, fw, fh);
            let fast = masked_match(&frame, &template).unwrap();
            let naive = naive_masked_match(&frame, &template);
            for (i, (a, b)) in fast.values().iter().zip(naive.values()).enumerate() {
                assert!(
                    (a - b).abs() < 1e-4,
                    "case {case}, index {i}: fast {a} vs naive {b}"
                );
            }
        }
    }

    #[test]
    fn fast_match_equals_naive_for_builtin_template() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let template = BloodBarTemplate::builtin();
        let mut frame = random_frame(&mut rng, 150, 50);
        paste(&mut frame, &template, 40, 20);
        let fast = masked_match(&frame, &template).unwrap();
        let naive = naive_masked_match(&frame, &template);
        for (a, b) in fast.values().iter().zip(naive.values()) {
            assert!((a - b).abs() < 1e-4, "fast {a} vs naive {b}");
        }
    }

    #[test]
    fn mask_zero_pixels_never_change_the_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let template = BloodBarTemplate::builtin();
        let mut frame = random_frame(&mut rng, 150, 50);
        paste(&mut frame, &template, 40, 20);
        let before = masked_match(&frame, &template).unwrap().at(40, 20);
        // Scribble over the fill area and digit box of the pasted bar.
        let fill = template.fill_region().unwrap();
        for y in 0..fill.h {
            for x in 0..fill.w {
                frame.set(40 + fill.x as u32 + x, 20 + fill.y as u32 + y, 0, rng.gen());
            }
        }
        for y in DIGIT_RECT.y as u32..DIGIT_RECT.y as u32 + DIGIT_RECT.h {
            for x in DIGIT_RECT.x as u32..DIGIT_RECT.x as u32 + DIGIT_RECT.w {
                frame.set(40 + x, 20 + y, 0, rng.gen());
            }
        }
        let after = masked_match(&frame, &template).unwrap().at(40, 20);
        assert_eq!(before, after);
    }

    #[test]
    fn local_maxima_single_spike() {
        let mut map = MatchMap::zeros(30, 20);
        map.set(14, 9, 0.9);
        let maxima = find_local_maxima(&map, 12);
        // The spike plus the all-zero plateau outside its window.
        assert!(maxima
            .iter()
            .any(|c| (c.x, c.y) == (14, 9) && c.value == 0.9));
        let spike_window =
            |c: &PeakCandidate| (c.x as i64 - 14).abs() <= 12 && (c.y as i64 - 9).abs() <= 12;
        assert!(maxima.iter().filter(|c| spike_window(c)).count() == 1);
    }

    #[test]
    fn local_maxima_constant_map_all_qualify() {
        let map = MatchMap::from_values(6, 4, vec![0.5; 24]).unwrap();
        assert_eq!(find_local_maxima(&map, 2).len(), 24);
    }

    #[test]
    fn score_of_isolated_unit_peak() {
        // 3x3 map, center 1, neighbors 0, radius 1: n = 8, contrast = 1,
        // so alpha = beta = 1 gives score 2.
        let mut map = MatchMap::zeros(3, 3);
        map.set(1, 1, 1.0);
        let params = ScoreParams {
            alpha: 1.0,
            beta: 1.0,
            radius: 1,
            top_k: 20,
            score_threshold: 0.0,
        };
        let ranked = rank_and_score(&map, vec![PeakCandidate::new(1, 1, 1.0)], &params);
        assert_eq!(ranked[0].score, 2.0);
    }

    #[test]
    fn score_of_flat_window_is_alpha_v0() {
        let map = MatchMap::from_values(9, 9, vec![0.37; 81]).unwrap();
        let params = ScoreParams {
            alpha: 1.25,
            beta: 3.0,
            radius: 3,
            top_k: 5,
            score_threshold: 0.0,
        };
        let ranked = rank_and_score(&map, vec![PeakCandidate::new(4, 4, 0.37)], &params);
        assert_eq!(ranked[0].score, (1.25 * 0.37f32 as f64) as f32);
    }

    #[test]
    fn rank_truncates_to_top_k() {
        let mut map = MatchMap::zeros(40, 40);
        let mut candidates = Vec::new();
        for i in 0..25u32 {
            let (x, y) = (i % 8 * 5, i / 8 * 5);
            map.set(x, y, 0.3 + i as f32 * 0.01);
            candidates.push(PeakCandidate::new(x, y, map.at(x, y)));
        }
        let ranked = rank_and_score(&map, candidates, &ScoreParams::default());
        assert_eq!(ranked.len(), 20);
        // The five weakest raw values were dropped.
        assert!(ranked.iter().all(|c| c.value >= 0.35));
    }

    #[test]
    fn threshold_keeps_only_strong_scores() {
        let params = ScoreParams {
            score_threshold: 0.55,
            ..ScoreParams::default()
        };
        let mut weak = PeakCandidate::new(0, 0, 0.2);
        weak.score = 0.31;
        let mut strong = PeakCandidate::new(5, 0, 0.9);
        strong.score = 3.4;
        assert_eq!(
            threshold_candidates(vec![strong, weak], &params),
            vec![strong]
        );
        let mut below = PeakCandidate::new(1, 1, 0.1);
        below.score = 0.5;
        assert!(threshold_candidates(vec![below], &params).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ranked_scores_are_sorted_and_bounded(
            values in proptest::collection::vec(-1.0f32..1.0, 30 * 30),
            radius in 1u32..6,
            top_k in 1usize..25,
        ) {
            let map = MatchMap::from_values(30, 30, values).unwrap();
            let params = ScoreParams { radius, top_k, ..ScoreParams::default() };
            let maxima = find_local_maxima(&map, radius);
            let ranked = rank_and_score(&map, maxima, &params);
            prop_assert!(ranked.len() <= top_k);
            for pair in ranked.windows(2) {
                prop_assert!(pair[0].score >= pair[1].score);
            }
        }

        #[test]
        fn raising_v0_raises_the_score(
            values in proptest::collection::vec(-0.5f32..0.5, 11 * 11),
            bump in 0.01f32..0.5,
        ) {
            // Monotonicity in v0: increasing the center value increases the
            // score when the rest of the window is unchanged.
            let mut map = MatchMap::from_values(11, 11, values).unwrap();
            let params = ScoreParams { radius: 5, ..ScoreParams::default() };
            let score_at = |map: &MatchMap| {
                rank_and_score(map, vec![PeakCandidate::new(5, 5, map.at(5, 5))], &params)[0].score
            };
            let before = score_at(&map);
            map.set(5, 5, map.at(5, 5) + bump);
            prop_assert!(score_at(&map) > before);
        }

        #[test]
        fn raising_a_neighbor_lowers_the_score(
            values in proptest::collection::vec(-0.5f32..0.5, 11 * 11),
            bump in 0.01f32..0.5,
        ) {
            let mut map = MatchMap::from_values(11, 11, values).unwrap();
            let params = ScoreParams { radius: 5, ..ScoreParams::default() };
            let score_at = |map: &MatchMap| {
                rank_and_score(map, vec![PeakCandidate::new(5, 5, map.at(5, 5))], &params)[0].score
            };
            let before = score_at(&map);
            map.set(2, 3, map.at(2, 3) + bump);
            prop_assert!(score_at(&map) < before);
        }
    }
}
