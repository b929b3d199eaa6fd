//! Hero detection and recognition for *Honor of Kings* gameplay video.
//!
//! Every hero on screen carries a blood bar with a fixed chrome, so the
//! pipeline finds heroes by template-matching that chrome and then works
//! outward from each match:
//!
//! 1. [`raster`] — 8-bit raster images, grayscale conversion, height
//!    normalization and the maximum filter used for peak picking.
//! 2. [`template`] — masked normalized cross-correlation against the blood
//!    bar template plus local-maximum ranking and thresholding.
//! 3. [`nms`] — offset-threshold non-maximum suppression of duplicate peaks.
//! 4. [`camp`] — classifies each surviving bar as self / friend / enemy /
//!    empty from the dominant channel of its leftmost fill pixels, and
//!    rejects bar-shaped clutter.
//! 5. [`roi`] — regions of interest derived from a detection: the appearance
//!    crop under the bar, the skill wheel region, and the first-skill icon
//!    located via circle detection.
//! 6. [`recognition`] — pluggable hero classifiers (nearest-centroid
//!    reference model, external subprocess bridge), result fusion and
//!    video-level accumulation.
//! 7. [`synth`] — deterministic synthetic scene renderer that produces
//!    labeled frames and corpora for evaluation and training.
//! 8. [`dataset`] — automatic extraction of labeled training crops from
//!    gameplay recordings of a known hero.
//! 9. [`pipeline`] — ties 1–4 together behind [`pipeline::Detector`].
//!
//! Coordinates inside the pipeline live in the normalized frame (720 px
//! tall); [`pipeline::FrameDetections`] maps results back to source pixels.

pub mod camp;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod nms;
pub mod pipeline;
pub mod raster;
pub mod recognition;
pub mod roi;
pub mod synth;
pub mod template;

pub use camp::{classify_camp, leftmost_mean_color, Camp, CampVerdict};
pub use dataset::{
    extract_frame, extract_leading_samples, load_samples, split_samples, ExtractParams,
    SampleRecord, SamplesManifest,
};
pub use error::{Error, Result};
pub use geometry::{Circle, Rect};
pub use nms::{suppress, NmsParams};
pub use pipeline::{Detection, Detector, DetectorParams, FrameDetections};
pub use raster::{
    crop, maximum_filter, normalize_height, resize_bilinear, to_grayscale, MatchMap,
    NormalizedFrame, RasterImage, NORMALIZED_HEIGHT,
};
pub use recognition::{
    accumulate_video, fuse_leading, recognize_frame, train_reference, validate_ranking,
    BridgeClassifier, Classifier, ClassifierStack, ExternalBridge, FrameRecognition, HeroTally,
    LeadingDetail, RecognitionParams, RecognitionResult, ReferenceClassifier, RoiSource, RoiType,
    VideoAccumulator, VideoSummary, UNKNOWN_LABEL,
};
pub use roi::{
    appearance_rect, detect_circles, first_skill_in_region, first_skill_rect, skill_region_rect,
};
pub use synth::{
    corpus_scene_spec, glyph_sprite, render, render_corpus, shop_scene, sprite_sample,
    video_scene_spec, BarSpec, BarTruth, CircleTruth, ClutterSpec, CorpusManifest, CorpusParams,
    GroundTruth, SceneRecord, SceneSpec, SkillWheelSpec, VideoParams,
};
pub use template::{
    find_local_maxima, masked_match, rank_and_score, threshold_candidates, BloodBarTemplate,
    PeakCandidate, ScoreParams,
};
