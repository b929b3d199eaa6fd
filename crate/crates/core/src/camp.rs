//! Camp classification from blood bar color.
//!
//! The HP fill drains from right to left, so the pixels just inside the
//! left edge of the fill area keep their camp color as long as any HP
//! remains: green for the player's own hero, blue for teammates, red for
//! enemies. A uniform dark gray there means an empty bar (hero still
//! present, camp unknowable), and anything else is bar-shaped clutter —
//! shop rows, score panels — that the matcher picked up and we reject.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::raster::{crop, RasterImage};
use crate::template::{BloodBarTemplate, PeakCandidate};

/// Which side a detected hero belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Camp {
    /// The hero the player controls (green bar).
    SelfHero,
    /// A teammate (blue bar).
    Friend,
    /// An opponent (red bar).
    Enemy,
    /// Bar with no fill left; camp cannot be read off an empty bar.
    Unknown,
}

/// Outcome of camp classification: a camp, or rejection of the detection
/// as a false positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CampVerdict {
    Camp(Camp),
    Rejected,
}

/// How strongly a channel must dominate both others to declare a camp.
const DOMINANCE: f64 = 1.5;
/// Minimum value of the dominant channel.
const DOMINANT_FLOOR: f64 = 100.0;
/// Inclusive band that all three channels must sit in for an empty bar.
const EMPTY_BAND: (f64, f64) = (70.0, 100.0);

/// Classifies a mean fill color.
///
/// A camp is declared when one channel exceeds 100 and is more than 1.5x
/// both other channels (green = self, blue = friend, red = enemy). If no
/// channel dominates but all three lie in [70, 100], the bar is empty and
/// the camp is [`Camp::Unknown`]. Everything else is rejected.
pub fn classify_camp(r: f64, g: f64, b: f64) -> CampVerdict {
    let dominant =
        |c: f64, o1: f64, o2: f64| c > DOMINANT_FLOOR && c > DOMINANCE * o1 && c > DOMINANCE * o2;
    if dominant(g, r, b) {
        return CampVerdict::Camp(Camp::SelfHero);
    }
    if dominant(b, r, g) {
        return CampVerdict::Camp(Camp::Friend);
    }
    if dominant(r, g, b) {
        return CampVerdict::Camp(Camp::Enemy);
    }
    let in_band = |c: f64| (EMPTY_BAND.0..=EMPTY_BAND.1).contains(&c);
    if in_band(r) && in_band(g) && in_band(b) {
        return CampVerdict::Camp(Camp::Unknown);
    }
    CampVerdict::Rejected
}

/// Mean color of the leftmost `strip_width` columns of the detection's
/// fill area, the pixels that stay colored until HP hits zero. The strip
/// spans the full fill height; its offsets come from the template mask's
/// fill region, so a custom template carries its own geometry. The frame
/// must be the RGB normalized frame the detection was made in.
pub fn leftmost_mean_color(
    frame: &RasterImage,
    detection: &PeakCandidate,
    template: &BloodBarTemplate,
    strip_width: u32,
) -> Result<(f64, f64, f64)> {
    if frame.channels() != 3 {
        return Err(Error::invalid("leftmost_mean_color expects an RGB frame"));
    }
    if strip_width == 0 {
        return Err(Error::invalid("strip width must be >= 1"));
    }
    let fill = template
        .fill_region()
        .ok_or_else(|| Error::invalid("template mask has no fill region"))?;
    let strip = Rect::new(
        detection.x as i32 + fill.x,
        detection.y as i32 + fill.y,
        strip_width.min(fill.w),
        fill.h,
    );
    let (pixels, actual) = crop(frame, &strip)?;
    if actual != strip {
        return Err(Error::invalid(format!(
            "fill strip {strip:?} reaches outside the {}x{} frame",
            frame.width(),
            frame.height()
        )));
    }
    let mut sums = [0f64; 3];
    for px in pixels.pixels().chunks_exact(3) {
        sums[0] += px[0] as f64;
        sums[1] += px[1] as f64;
        sums[2] += px[2] as f64;
    }
    let count = (pixels.width() * pixels.height()) as f64;
    Ok((sums[0] / count, sums[1] / count, sums[2] / count))
}
