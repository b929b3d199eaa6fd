//! Training-sample extraction and dataset bookkeeping.
//!
//! Labeled crops come from solo-mode footage where the hero on screen is
//! known: frames are run through the detector, the best self-camp bar
//! near the frame center is taken as the labeled hero, and its crops are
//! written out with a JSON manifest. A stratified split then carves the
//! manifest into train and eval subsets.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::camp::Camp;
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::pipeline::Detector;
use crate::raster::{crop, RasterImage};
use crate::recognition::{RecognitionParams, RoiType};
use crate::roi::{appearance_rect, first_skill_in_region, skill_region_rect};

/// One extracted crop on disk, relative to its manifest. Crops live under
/// `<label>/<roi>/<frame_id>.png` so a directory listing alone tells the
/// full story of where each sample came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Path of the crop image, relative to the manifest.
    pub image: String,
    pub label: String,
    pub roi: RoiType,
    /// Identifier of the source frame the crop was taken from.
    pub frame: String,
    /// Crop rectangle in the normalized source frame.
    pub rect: Rect,
}

/// Manifest of extracted samples, stored as `samples.json` next to the
/// crop images.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SamplesManifest {
    pub schema: u32,
    pub samples: Vec<SampleRecord>,
}

impl SamplesManifest {
    pub fn new(samples: Vec<SampleRecord>) -> Self {
        SamplesManifest { schema: 1, samples }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let manifest: SamplesManifest = serde_json::from_slice(&raw)?;
        if manifest.schema != 1 {
            return Err(Error::BadFormat(format!(
                "unsupported samples schema {}",
                manifest.schema
            )));
        }
        Ok(manifest)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_vec_pretty(self)?;
        write_atomic(path, &json)
    }

    /// Concatenates manifests (e.g. one per extracted hero).
    pub fn merge(manifests: impl IntoIterator<Item = SamplesManifest>) -> Self {
        let samples = manifests.into_iter().flat_map(|m| m.samples).collect();
        SamplesManifest::new(samples)
    }
}

/// Writes via a temp file in the target directory plus an atomic rename,
/// so readers never observe a half-written file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    std::fs::write(tmp.path(), bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path, e.error))
        .map(|_| ())
}

fn save_png_atomic(image: &RasterImage, path: &Path) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = tempfile::Builder::new()
        .suffix(".png")
        .tempfile_in(dir)
        .map_err(|e| Error::io(dir, e))?;
    image.save_png(tmp.path())?;
    tmp.persist(path)
        .map_err(|e| Error::io(path, e.error))
        .map(|_| ())
}

/// Extraction settings. The window fractions bound where the labeled
/// hero's bar center may sit: in solo footage the player's hero stays
/// near mid-screen, so off-center self bars are treated as noise.
#[derive(Debug, Clone)]
pub struct ExtractParams {
    pub window_w_frac: f64,
    pub window_h_frac: f64,
    /// Crop kinds to extract per accepted frame.
    pub rois: Vec<RoiType>,
    pub recognition: RecognitionParams,
}

impl Default for ExtractParams {
    fn default() -> Self {
        ExtractParams {
            window_w_frac: 0.5,
            window_h_frac: 0.6,
            rois: vec![RoiType::Appearance],
            recognition: RecognitionParams::default(),
        }
    }
}

/// Centered acceptance window for the labeled hero's bar center.
pub fn central_window(frame_dims: (u32, u32), w_frac: f64, h_frac: f64) -> Rect {
    let (w, h) = frame_dims;
    let win_w = ((w as f64 * w_frac).round() as u32).clamp(1, w);
    let win_h = ((h as f64 * h_frac).round() as u32).clamp(1, h);
    Rect::new(
        ((w - win_w) / 2) as i32,
        ((h - win_h) / 2) as i32,
        win_w,
        win_h,
    )
}

/// Detects bars in `source` and extracts crops for the highest-scored
/// self-camp detection whose bar center lies in the central window.
/// Each crop comes with its rectangle in the normalized frame. Returns an
/// empty list when no detection qualifies; the first-skill crop is
/// silently skipped when no wheel circle is found.
pub fn extract_frame(
    source: &RasterImage,
    detector: &Detector,
    params: &ExtractParams,
) -> Result<Vec<(RoiType, RasterImage, Rect)>> {
    let detected = detector.detect(source)?;
    let norm = &detected.frame.image;
    let dims = (norm.width(), norm.height());
    let window = central_window(dims, params.window_w_frac, params.window_h_frac);

    let best = detected
        .detections
        .iter()
        .filter(|d| d.camp == Camp::SelfHero)
        .filter(|d| {
            let (cx, cy) = d.bar.center();
            window.contains_point(cx as i32, cy as i32)
        })
        .max_by(|a, b| a.score.total_cmp(&b.score));
    let Some(best) = best else {
        return Ok(Vec::new());
    };

    let mut crops = Vec::new();
    for roi in &params.rois {
        match roi {
            RoiType::Appearance => {
                let rect = appearance_rect(&best.bar, dims, params.recognition.appearance_offset);
                let (img, _) = crop(norm, &rect)?;
                crops.push((RoiType::Appearance, img, rect));
            }
            RoiType::SkillRegion => {
                let rect = skill_region_rect(dims);
                let (img, _) = crop(norm, &rect)?;
                crops.push((RoiType::SkillRegion, img, rect));
            }
            RoiType::FirstSkill => {
                let rect = skill_region_rect(dims);
                let (region_img, _) = crop(norm, &rect)?;
                let radii = params.recognition.circle_radii;
                if let Some(first) = first_skill_in_region(&region_img, radii.0, radii.1) {
                    let (img, _) = crop(&region_img, &first)?;
                    let abs = Rect::new(rect.x + first.x, rect.y + first.y, first.w, first.h);
                    crops.push((RoiType::FirstSkill, img, abs));
                }
            }
        }
    }
    Ok(crops)
}

/// Extracts crops for one hero from a list of frame images, writing
/// `<label>/<roi>/<frame_id>.png` files into `out_dir` (atomically, so an
/// interrupted run leaves no partial images). The frame id is the input's
/// position in `frames`; the record additionally keeps the source path.
/// Returns the manifest of what was written; unreadable frames are
/// skipped with a warning, and frames without a qualifying detection
/// contribute nothing.
pub fn extract_leading_samples(
    frames: &[impl AsRef<Path>],
    label: &str,
    out_dir: impl AsRef<Path>,
    detector: &Detector,
    params: &ExtractParams,
) -> Result<SamplesManifest> {
    if label.is_empty() {
        return Err(Error::invalid("label must not be empty"));
    }
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut samples = Vec::new();
    for (index, frame_path) in frames.iter().enumerate() {
        let frame_path = frame_path.as_ref();
        let source = match RasterImage::load_png(frame_path) {
            Ok(img) => img,
            Err(err) => {
                log::warn!("skipping unreadable frame {}: {err}", frame_path.display());
                continue;
            }
        };
        for (roi, image, rect) in extract_frame(&source, detector, params)? {
            let rel_dir = Path::new(label).join(roi.as_str());
            std::fs::create_dir_all(out_dir.join(&rel_dir)).map_err(|e| Error::io(out_dir, e))?;
            let name = format!("{label}/{}/{index:05}.png", roi.as_str());
            save_png_atomic(&image, &out_dir.join(&name))?;
            samples.push(SampleRecord {
                image: name,
                label: label.to_string(),
                roi,
                frame: frame_path.display().to_string(),
                rect,
            });
        }
    }
    Ok(SamplesManifest::new(samples))
}

/// Loads every sample of one crop kind as `(label, image)` pairs, ready
/// for training.
pub fn load_samples(
    dir: impl AsRef<Path>,
    manifest: &SamplesManifest,
    roi: RoiType,
) -> Result<Vec<(String, RasterImage)>> {
    let dir = dir.as_ref();
    manifest
        .samples
        .iter()
        .filter(|s| s.roi == roi)
        .map(|s| Ok((s.label.clone(), RasterImage::load_png(dir.join(&s.image))?)))
        .collect()
}

/// Stratified train/eval split: within every (label, crop kind) group the
/// samples are shuffled and `round(n * train_frac)` of them (clamped so
/// both sides stay nonempty) go to train. Single-sample groups go
/// entirely to train, since an eval-only label could never be learned.
/// Deterministic for a given seed; output order follows the input.
pub fn split_samples(
    manifest: &SamplesManifest,
    train_frac: f64,
    seed: u64,
) -> Result<(SamplesManifest, SamplesManifest)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::invalid("train fraction must be in (0, 1)"));
    }
    let mut groups: BTreeMap<(&str, RoiType), Vec<usize>> = BTreeMap::new();
    for (i, s) in manifest.samples.iter().enumerate() {
        groups.entry((s.label.as_str(), s.roi)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut to_train = vec![false; manifest.samples.len()];
    for ((label, roi), mut indices) in groups {
        let n = indices.len();
        if n < 2 {
            log::warn!(
                "label {label:?} ({}) has {n} sample(s); all go to train",
                roi.as_str()
            );
            for i in indices {
                to_train[i] = true;
            }
            continue;
        }
        indices.shuffle(&mut rng);
        let take = ((n as f64 * train_frac).round() as usize).clamp(1, n - 1);
        for &i in &indices[..take] {
            to_train[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut eval = Vec::new();
    for (i, s) in manifest.samples.iter().enumerate() {
        if to_train[i] {
            train.push(s.clone());
        } else {
            eval.push(s.clone());
        }
    }
    Ok((SamplesManifest::new(train), SamplesManifest::new(eval)))
}
