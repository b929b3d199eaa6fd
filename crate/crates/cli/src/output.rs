//! Machine-readable output documents. Every document carries
//! `"schema": 1` and is built from plain structs and sorted maps, so the
//! same inputs always serialize to the same bytes.

use std::collections::BTreeMap;

use heroscan_core::{Camp, HeroTally, RecognitionResult, Rect, RoiSource};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// One detected bar. `bbox` is in source-image coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionOut {
    pub bbox: Rect,
    pub camp: Camp,
    pub score: f32,
    pub value: f32,
}

/// Detections of one frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectFrameOut {
    pub path: String,
    pub width: u32,
    pub height: u32,
    pub detections: Vec<DetectionOut>,
}

/// `detect` output document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectOutput {
    pub schema: u32,
    pub frames: Vec<DetectFrameOut>,
}

/// One label/confidence pair of a classifier ranking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankingEntryOut {
    pub label: String,
    pub confidence: f32,
}

pub fn ranking_out(ranking: &[(String, f32)]) -> Vec<RankingEntryOut> {
    ranking
        .iter()
        .map(|(label, confidence)| RankingEntryOut {
            label: label.clone(),
            confidence: *confidence,
        })
        .collect()
}

/// One recognized hero: the detection plus its recognition result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeroOut {
    pub bbox: Rect,
    pub camp: Camp,
    pub score: f32,
    pub label: String,
    pub confidence: f32,
    pub source: RoiSource,
}

/// Per-crop rankings behind the leading hero's fused result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeadingOut {
    /// Index into the frame's `heroes` list.
    pub index: usize,
    pub appearance: Vec<RankingEntryOut>,
    pub skill_region: Option<Vec<RankingEntryOut>>,
    pub first_skill: Option<Vec<RankingEntryOut>>,
    pub fused: RecognitionResult,
}

/// Recognition results of one frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecognizeFrameOut {
    pub path: String,
    pub width: u32,
    pub height: u32,
    pub heroes: Vec<HeroOut>,
    pub leading: Option<LeadingOut>,
}

/// `recognize` output document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecognizeOutput {
    pub schema: u32,
    pub frames: Vec<RecognizeFrameOut>,
}

/// `video-summary` output document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoOutput {
    pub schema: u32,
    pub frames_total: usize,
    pub frames_processed: usize,
    pub stride: usize,
    pub camps: BTreeMap<Camp, Vec<HeroTally>>,
}

/// `bench` output document. A detection matches a ground-truth bar when
/// their centers lie within 5 px (source coordinates) and the camps
/// agree; precision and recall follow from that matching.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchOutput {
    pub schema: u32,
    pub frames: usize,
    pub truth_bars: usize,
    pub detections: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    /// Largest center distance among matched pairs, in source pixels.
    pub max_center_error_px: f64,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub p99_ms: f64,
}

/// `render-corpus` output document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderCorpusOutput {
    pub schema: u32,
    pub dir: String,
    pub scenes: usize,
    pub manifest: String,
}

/// `extract-samples` output document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractOutput {
    pub schema: u32,
    pub out_dir: String,
    pub frames_seen: usize,
    pub samples_written: usize,
    pub manifest: String,
}

/// `train-reference` output document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainOutput {
    pub schema: u32,
    pub model: String,
    pub labels: Vec<String>,
    pub train_samples: usize,
    pub eval_samples: usize,
    /// Top-1 accuracy on the held-out split; absent when everything
    /// trains (train fraction 1).
    pub holdout_accuracy: Option<f64>,
}

/// Serializes a document the way every command prints it: pretty JSON
/// plus a trailing newline.
pub fn to_json_line<T: Serialize>(doc: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    Ok(text)
}
