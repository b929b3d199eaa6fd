//! The end-to-end blood bar detector: height normalization, grayscale
//! conversion, masked template matching, peak ranking, non-maximum
//! suppression and camp classification, in that order.

use crate::camp::{classify_camp, leftmost_mean_color, Camp, CampVerdict};
use crate::error::Result;
use crate::geometry::Rect;
use crate::nms::{suppress, NmsParams};
use crate::raster::{
    normalize_height, to_grayscale, NormalizedFrame, RasterImage, NORMALIZED_HEIGHT,
};
use crate::template::{
    find_local_maxima, masked_match, rank_and_score, threshold_candidates, BloodBarTemplate,
    ScoreParams,
};

/// One detected blood bar, in normalized-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Bounding box of the bar (the template footprint).
    pub bar: Rect,
    pub camp: Camp,
    /// Contrast score of the underlying match peak.
    pub score: f32,
    /// Raw masked correlation value at the peak.
    pub value: f32,
}

/// Detector configuration. When `nms` is `None` the thresholds derive
/// from the template width.
#[derive(Debug, Clone)]
pub struct DetectorParams {
    pub score: ScoreParams,
    pub nms: Option<NmsParams>,
    /// Width in pixels of the fill strip sampled for camp classification.
    pub camp_strip_width: u32,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            score: ScoreParams::default(),
            nms: None,
            camp_strip_width: 4,
        }
    }
}

/// Detections for one frame together with the normalized frame they were
/// made in, so callers can crop recognition regions and map results back
/// to source coordinates.
#[derive(Debug, Clone)]
pub struct FrameDetections {
    pub frame: NormalizedFrame,
    /// Sorted by score, descending.
    pub detections: Vec<Detection>,
}

impl FrameDetections {
    /// Maps a normalized-frame rectangle back to source pixels.
    pub fn source_rect(&self, rect: &Rect) -> Rect {
        if self.frame.scale == 1.0 {
            return *rect;
        }
        let s = self.frame.scale;
        Rect::new(
            (rect.x as f64 / s).round() as i32,
            (rect.y as f64 / s).round() as i32,
            ((rect.w as f64 / s).round() as u32).max(1),
            ((rect.h as f64 / s).round() as u32).max(1),
        )
    }
}

/// Owns the template and parameters and runs the detection chain.
#[derive(Debug, Clone)]
pub struct Detector {
    template: BloodBarTemplate,
    score: ScoreParams,
    nms: NmsParams,
    camp_strip_width: u32,
}

impl Detector {
    pub fn new(template: BloodBarTemplate, params: DetectorParams) -> Result<Self> {
        params.score.validate()?;
        let nms = params
            .nms
            .unwrap_or_else(|| NmsParams::for_template_width(template.width()));
        Ok(Detector {
            template,
            score: params.score,
            nms,
            camp_strip_width: params.camp_strip_width,
        })
    }

    /// Built-in template, default parameters.
    pub fn with_defaults() -> Self {
        Detector::new(BloodBarTemplate::builtin(), DetectorParams::default())
            .expect("default params are valid")
    }

    pub fn template(&self) -> &BloodBarTemplate {
        &self.template
    }

    pub fn nms_params(&self) -> NmsParams {
        self.nms
    }

    pub fn score_params(&self) -> ScoreParams {
        self.score
    }

    /// Normalizes a source frame and detects bars in it.
    pub fn detect(&self, source: &RasterImage) -> Result<FrameDetections> {
        let frame = normalize_height(source, NORMALIZED_HEIGHT)?;
        let detections = self.detect_normalized(&frame.image)?;
        Ok(FrameDetections { frame, detections })
    }

    /// Detection chain on an already-normalized RGB (or grayscale) frame.
    /// Returns detections sorted by score, descending.
    pub fn detect_normalized(&self, frame: &RasterImage) -> Result<Vec<Detection>> {
        let gray = to_grayscale(frame);
        let map = masked_match(&gray, &self.template)?;
        let maxima = find_local_maxima(&map, self.score.radius);
        let ranked = rank_and_score(&map, maxima, &self.score);
        let strong = threshold_candidates(ranked, &self.score);
        let survivors = suppress(&strong, &self.nms)?;

        let mut detections = Vec::with_capacity(survivors.len());
        for peak in &survivors {
            let camp = if frame.channels() == 3 {
                let (r, g, b) =
                    leftmost_mean_color(frame, peak, &self.template, self.camp_strip_width)?;
                match classify_camp(r, g, b) {
                    CampVerdict::Camp(c) => c,
                    CampVerdict::Rejected => continue,
                }
            } else {
                // Camp needs color; grayscale callers get Unknown bars.
                Camp::Unknown
            };
            detections.push(Detection {
                bar: Rect::new(
                    peak.x as i32,
                    peak.y as i32,
                    self.template.width(),
                    self.template.height(),
                ),
                camp,
                score: peak.score,
                value: peak.value,
            });
        }
        Ok(detections)
    }
}
