//! Regions of interest derived from a blood bar detection.
//!
//! Three crops feed recognition: the hero's appearance directly under the
//! bar, the skill wheel region in the lower-right HUD (whose position is a
//! fixed fraction of the frame, compensated for aspect ratio), and the
//! first-skill icon, found as the largest circle in the lower-left
//! quadrant of the skill region. All geometry is expressed in
//! normalized-frame pixels (720 px tall frames).

use crate::geometry::{Circle, Rect};
use crate::raster::{crop, to_grayscale, RasterImage};

/// Side length of the appearance crop under the bar.
pub const APPEARANCE_SIZE: u32 = 163;
/// Side length of the first-skill crop inside the skill region.
pub const FIRST_SKILL_SIZE: u32 = 110;
/// Vertical gap between the bar's bottom edge and the appearance crop.
pub const DEFAULT_APPEARANCE_OFFSET: u32 = 8;
/// Default circle radius search range for the first-skill wheel at 720p.
pub const DEFAULT_CIRCLE_RADII: (u32, u32) = (30, 70);

/// Square crop of the hero's appearance: horizontally centered on the
/// bar, top edge `offset` pixels below the bar's bottom. The rectangle is
/// shifted (never shrunk) to stay inside the frame.
pub fn appearance_rect(bar: &Rect, frame_dims: (u32, u32), offset: u32) -> Rect {
    let center_x = bar.x + bar.w as i32 / 2;
    Rect::new(
        center_x - (APPEARANCE_SIZE / 2) as i32,
        bar.y + bar.h as i32 + offset as i32,
        APPEARANCE_SIZE,
        APPEARANCE_SIZE,
    )
    .shift_into(frame_dims.0, frame_dims.1)
}

/// The skill wheel region. Its left edge sits half a frame plus a fixed
/// fraction of the 16:9-normalized width to the right, its top at 47.5%
/// of the frame height; the region is square with side half the frame
/// height. On narrow aspect ratios the rectangle is shifted back inside
/// the frame.
pub fn skill_region_rect(frame_dims: (u32, u32)) -> Rect {
    let (w, h) = (frame_dims.0 as f64, frame_dims.1 as f64);
    let norm_width = h * 16.0 / 9.0;
    let x = 0.5 * w + 0.1875 * norm_width;
    let y = 0.475 * h;
    let side = (0.5 * h).round() as u32;
    Rect::new(x.round() as i32, y.round() as i32, side, side).shift_into(frame_dims.0, frame_dims.1)
}

const SOBEL_MAGNITUDE_FLOOR: i32 = 100;
/// Fraction of the circumference that must vote for a circle.
const VOTE_FRACTION: f64 = 0.45;
/// Candidate centers closer than this collapse onto the stronger one.
const CENTER_DEDUP_DIST: i64 = 8;

/// Gradient Hough circle detector. Edge pixels (Sobel magnitude above a
/// floor) vote along their gradient direction, both polarities, for every
/// radius in `[r_min, r_max]`. A radius/center cell whose 5x5 vote
/// neighborhood reaches a fixed fraction of that radius' circumference
/// becomes a circle; overlapping candidates collapse onto the strongest.
/// The pool is 5x5 because a few-pixel-thick rim plus quantized gradient
/// directions disperses landings about two pixels around the center.
/// The result is sorted by radius descending, then votes descending, so
/// the first entry is the largest circle.
pub fn detect_circles(gray: &RasterImage, r_min: u32, r_max: u32) -> Vec<Circle> {
    assert!(gray.channels() == 1, "detect_circles expects grayscale");
    assert!(r_min >= 1 && r_min <= r_max, "invalid radius range");
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    if w < 3 || h < 3 {
        return Vec::new();
    }

    // Sobel gradients of interior pixels.
    let px = |x: usize, y: usize| gray.pixels()[y * w + x] as i32;
    let mut edges: Vec<(usize, usize, f64, f64)> = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)
                - px(x - 1, y - 1)
                - 2 * px(x - 1, y)
                - px(x - 1, y + 1);
            let gy = px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)
                - px(x - 1, y - 1)
                - 2 * px(x, y - 1)
                - px(x + 1, y - 1);
            let mag2 = gx * gx + gy * gy;
            if mag2 >= SOBEL_MAGNITUDE_FLOOR * SOBEL_MAGNITUDE_FLOOR {
                let mag = (mag2 as f64).sqrt();
                edges.push((x, y, gx as f64 / mag, gy as f64 / mag));
            }
        }
    }

    let radii = (r_max - r_min + 1) as usize;
    let mut accumulator = vec![0u32; radii * w * h];
    for &(x, y, dx, dy) in &edges {
        for r_idx in 0..radii {
            let r = (r_min as usize + r_idx) as f64;
            for sign in [-1.0, 1.0] {
                let cx = (x as f64 + sign * r * dx).round();
                let cy = (y as f64 + sign * r * dy).round();
                if cx >= 0.0 && cy >= 0.0 && (cx as usize) < w && (cy as usize) < h {
                    accumulator[(r_idx * h + cy as usize) * w + cx as usize] += 1;
                }
            }
        }
    }

    // Peak extraction with a 5x5 vote pool per cell.
    let mut candidates: Vec<Circle> = Vec::new();
    for r_idx in 0..radii {
        let r = r_min + r_idx as u32;
        let plane = &accumulator[r_idx * w * h..(r_idx + 1) * w * h];
        let threshold = (VOTE_FRACTION * 2.0 * std::f64::consts::PI * r as f64).round() as u32;
        for y in 2..h - 2 {
            for x in 2..w - 2 {
                if plane[y * w + x] == 0 {
                    continue;
                }
                let pooled: u32 = (0..5)
                    .flat_map(|dy| (0..5).map(move |dx| plane[(y + dy - 2) * w + (x + dx - 2)]))
                    .sum();
                if pooled >= threshold.max(1) {
                    candidates.push(Circle {
                        cx: x as i32,
                        cy: y as i32,
                        r,
                        votes: pooled,
                    });
                }
            }
        }
    }

    // Strongest first, then collapse near-duplicates of the same circle.
    candidates.sort_by(|a, b| {
        b.votes
            .cmp(&a.votes)
            .then_with(|| (a.r, a.cy, a.cx).cmp(&(b.r, b.cy, b.cx)))
    });
    let mut kept: Vec<Circle> = Vec::new();
    for cand in candidates {
        let duplicate = kept.iter().any(|k| {
            let d2 = (k.cx as i64 - cand.cx as i64).pow(2) + (k.cy as i64 - cand.cy as i64).pow(2);
            d2 < CENTER_DEDUP_DIST * CENTER_DEDUP_DIST
        });
        if !duplicate {
            kept.push(cand);
        }
    }
    kept.sort_by(|a, b| {
        b.r.cmp(&a.r)
            .then_with(|| b.votes.cmp(&a.votes))
            .then_with(|| (a.cy, a.cx).cmp(&(b.cy, b.cx)))
    });
    kept
}

/// Crop for the first-skill icon: a square centered on the largest
/// detected circle, shifted to stay inside the skill region. `None` when
/// no circle was found.
pub fn first_skill_rect(region_dims: (u32, u32), circles: &[Circle]) -> Option<Rect> {
    let largest = circles.iter().max_by_key(|c| (c.r, c.votes))?;
    Some(
        Rect::new(
            largest.cx - (FIRST_SKILL_SIZE / 2) as i32,
            largest.cy - (FIRST_SKILL_SIZE / 2) as i32,
            FIRST_SKILL_SIZE,
            FIRST_SKILL_SIZE,
        )
        .shift_into(region_dims.0, region_dims.1),
    )
}

/// Runs the whole first-skill flow on an already-cropped skill region
/// image: searches the lower-left quadrant for circles and returns the
/// crop rectangle (in region coordinates) around the largest one.
pub fn first_skill_in_region(region: &RasterImage, r_min: u32, r_max: u32) -> Option<Rect> {
    let (w, h) = (region.width(), region.height());
    if w < 2 || h < 2 {
        return None;
    }
    let quadrant = Rect::new(0, (h / 2) as i32, w / 2, h - h / 2);
    let (quad_img, _) = crop(region, &quadrant).ok()?;
    let mut circles = detect_circles(&to_grayscale(&quad_img), r_min, r_max);
    for c in &mut circles {
        c.cy += (h / 2) as i32;
    }
    first_skill_rect((w, h), &circles)
}
