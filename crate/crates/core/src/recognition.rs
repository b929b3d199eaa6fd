//! Hero recognition on top of bar detections.
//!
//! Recognition is pluggable: anything implementing [`Classifier`] can rank
//! hero labels for a crop. The crate ships a trainable nearest-centroid
//! [`ReferenceClassifier`] and an [`ExternalBridge`] that talks to a
//! subprocess over line-delimited JSON, so a real model (e.g. a CNN
//! served from Python) can plug in without recompiling.
//!
//! For the player's own hero three crops are classified — appearance,
//! skill wheel region and first-skill icon — and fused by averaging
//! per-label confidence. Other heroes are recognized from appearance
//! alone. Per-frame results accumulate into a [`VideoSummary`] that ranks
//! hero names per camp over a whole video.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::camp::Camp;
use crate::error::{Error, Result};
use crate::pipeline::Detection;
use crate::raster::{crop, resize_bilinear, to_grayscale, RasterImage};
use crate::roi::{
    appearance_rect, first_skill_in_region, skill_region_rect, DEFAULT_APPEARANCE_OFFSET,
    DEFAULT_CIRCLE_RADII,
};

/// Label reported when no classifier output clears its threshold. Not a
/// valid hero name; such results are skipped during video accumulation.
pub const UNKNOWN_LABEL: &str = "unknown";

/// The three crop kinds a classifier can be trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoiType {
    Appearance,
    SkillRegion,
    FirstSkill,
}

impl RoiType {
    pub const ALL: [RoiType; 3] = [
        RoiType::Appearance,
        RoiType::SkillRegion,
        RoiType::FirstSkill,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RoiType::Appearance => "appearance",
            RoiType::SkillRegion => "skill_region",
            RoiType::FirstSkill => "first_skill",
        }
    }

    pub fn parse(s: &str) -> Result<RoiType> {
        match s {
            "appearance" => Ok(RoiType::Appearance),
            "skill_region" => Ok(RoiType::SkillRegion),
            "first_skill" => Ok(RoiType::FirstSkill),
            other => Err(Error::invalid(format!("unknown roi type {other:?}"))),
        }
    }

    /// Crop size in the normalized (720 px tall) frame.
    pub fn normalized_dims(&self) -> (u32, u32) {
        match self {
            RoiType::Appearance => (163, 163),
            RoiType::SkillRegion => (360, 360),
            RoiType::FirstSkill => (110, 110),
        }
    }
}

/// Which crop produced a recognition result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoiSource {
    Appearance,
    SkillRegion,
    FirstSkill,
    /// Averaged over all crops available for the leading hero.
    Fused,
}

/// A recognized hero label with its confidence and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub label: String,
    pub confidence: f32,
    pub source: RoiSource,
}

/// Ranks hero labels for one crop.
///
/// Output contract: confidences lie in `[0, 1]`, the list is sorted by
/// confidence descending, and labels are unique. `validate_ranking`
/// checks exactly this and is applied to untrusted implementations.
pub trait Classifier: Send + Sync {
    fn classify(&self, image: &RasterImage) -> Result<Vec<(String, f32)>>;

    /// Whether concurrent `classify` calls are safe. Implementations that
    /// return `false` are serialized by callers.
    fn concurrent_safe(&self) -> bool {
        true
    }
}

/// Checks the [`Classifier`] output contract.
pub fn validate_ranking(ranking: &[(String, f32)]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for pair in ranking.windows(2) {
        if pair[0].1 < pair[1].1 {
            return Err(Error::Classifier(
                "ranking not sorted by confidence descending".into(),
            ));
        }
    }
    for (label, confidence) in ranking {
        if !confidence.is_finite() || !(0.0..=1.0).contains(confidence) {
            return Err(Error::Classifier(format!(
                "confidence {confidence} for {label:?} outside [0, 1]"
            )));
        }
        if !seen.insert(label) {
            return Err(Error::Classifier(format!("duplicate label {label:?}")));
        }
    }
    Ok(())
}

const FEATURE_SIDE: u32 = 32;
/// Dimensionality of the reference classifier's feature vector.
pub const FEATURE_DIM: usize = (FEATURE_SIDE * FEATURE_SIDE) as usize;
/// Softmax temperature applied to negative centroid distances.
pub const DEFAULT_TEMPERATURE: f32 = 2.0;

const MODEL_MAGIC: &[u8; 4] = b"NCM1";

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    version: u32,
    labels: Vec<String>,
    feature_dim: usize,
    temperature: f32,
}

/// Nearest-centroid classifier over 32x32 grayscale features.
///
/// Each crop is converted to grayscale, resized to 32x32 and normalized to
/// zero mean / unit variance (making it invariant to global brightness and
/// contrast). Confidence is a softmax over negative Euclidean distances to
/// the per-label centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceClassifier {
    labels: Vec<String>,
    /// Row-major, `labels.len() * FEATURE_DIM`.
    centroids: Vec<f32>,
    temperature: f32,
}

impl ReferenceClassifier {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn temperature(&self) -> f32 {
        self.temperature
    }

    pub fn with_temperature(mut self, temperature: f32) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        self.temperature = temperature;
        Ok(self)
    }

    /// The normalized feature vector of one crop.
    pub fn feature(image: &RasterImage) -> Result<Vec<f32>> {
        let gray = to_grayscale(image);
        let small = resize_bilinear(&gray, FEATURE_SIDE, FEATURE_SIDE)?;
        let mut f: Vec<f32> = small.pixels().iter().map(|&p| p as f32).collect();
        let mean = f.iter().sum::<f32>() / FEATURE_DIM as f32;
        let var = f.iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / FEATURE_DIM as f32;
        let std = var.sqrt();
        if std < 1e-6 {
            f.fill(0.0);
        } else {
            for v in &mut f {
                *v = (*v - mean) / std;
            }
        }
        Ok(f)
    }

    /// Serializes the model: magic `NCM1`, a little-endian u32 JSON header
    /// length, the JSON header (version, labels, feature_dim, temperature)
    /// and the row-major centroid matrix as little-endian f32.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let header = serde_json::to_vec(&ModelHeader {
            version: 1,
            labels: self.labels.clone(),
            feature_dim: FEATURE_DIM,
            temperature: self.temperature,
        })?;
        let mut bytes = Vec::with_capacity(8 + header.len() + self.centroids.len() * 4);
        bytes.extend_from_slice(MODEL_MAGIC);
        bytes.extend_from_slice(&(header.len() as u32).to_le_bytes());
        bytes.extend_from_slice(&header);
        for v in &self.centroids {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 8 || &bytes[0..4] != MODEL_MAGIC {
            return Err(Error::BadFormat(format!(
                "{} is not a reference classifier model",
                path.display()
            )));
        }
        let header_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        if bytes.len() < 8 + header_len {
            return Err(Error::BadFormat("model header truncated".into()));
        }
        let header: ModelHeader = serde_json::from_slice(&bytes[8..8 + header_len])?;
        if header.version != 1 {
            return Err(Error::BadFormat(format!(
                "unsupported model version {}",
                header.version
            )));
        }
        if header.feature_dim != FEATURE_DIM {
            return Err(Error::BadFormat(format!(
                "model has {}-dim features, this build uses {FEATURE_DIM}",
                header.feature_dim
            )));
        }
        if header.labels.is_empty() {
            return Err(Error::BadFormat("model has no labels".into()));
        }
        let matrix = &bytes[8 + header_len..];
        let expected = header.labels.len() * FEATURE_DIM * 4;
        if matrix.len() != expected {
            return Err(Error::BadFormat(format!(
                "centroid matrix holds {} bytes, expected {expected}",
                matrix.len()
            )));
        }
        let centroids = matrix
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(ReferenceClassifier {
            labels: header.labels,
            centroids,
            temperature: header.temperature,
        })
    }
}

impl Classifier for ReferenceClassifier {
    fn classify(&self, image: &RasterImage) -> Result<Vec<(String, f32)>> {
        let feature = ReferenceClassifier::feature(image)?;
        let distances: Vec<f64> = self
            .centroids
            .chunks_exact(FEATURE_DIM)
            .map(|centroid| {
                centroid
                    .iter()
                    .zip(&feature)
                    .map(|(c, f)| {
                        let d = (c - f) as f64;
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let min = distances.iter().cloned().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = distances
            .iter()
            .map(|d| (-(d - min) / self.temperature as f64).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut ranking: Vec<(String, f32)> = self
            .labels
            .iter()
            .zip(&weights)
            .map(|(label, w)| (label.clone(), (w / total) as f32))
            .collect();
        ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(ranking)
    }
}

/// Trains a [`ReferenceClassifier`] by averaging the features of each
/// label's samples. Every label in `required_labels` must have at least
/// one sample; with an empty `required_labels` the label set is whatever
/// the samples cover.
pub fn train_reference(
    samples: &[(String, RasterImage)],
    required_labels: &[String],
) -> Result<ReferenceClassifier> {
    if samples.is_empty() {
        return Err(Error::invalid("no training samples"));
    }
    let mut sums: BTreeMap<&str, (Vec<f64>, u32)> = BTreeMap::new();
    for (label, image) in samples {
        let feature = ReferenceClassifier::feature(image)?;
        let entry = sums
            .entry(label.as_str())
            .or_insert_with(|| (vec![0.0; FEATURE_DIM], 0));
        for (acc, v) in entry.0.iter_mut().zip(&feature) {
            *acc += *v as f64;
        }
        entry.1 += 1;
    }
    let missing: Vec<String> = required_labels
        .iter()
        .filter(|l| !sums.contains_key(l.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingLabels(missing));
    }
    let mut labels = Vec::with_capacity(sums.len());
    let mut centroids = Vec::with_capacity(sums.len() * FEATURE_DIM);
    for (label, (sum, count)) in &sums {
        labels.push(label.to_string());
        centroids.extend(sum.iter().map(|v| (*v / *count as f64) as f32));
    }
    Ok(ReferenceClassifier {
        labels,
        centroids,
        temperature: DEFAULT_TEMPERATURE,
    })
}

/// Averages per-label confidence over the crops available for the leading
/// hero (appearance always, skill wheel and first skill when present) and
/// returns the winner, or [`UNKNOWN_LABEL`] when the winner's fused
/// confidence falls below `threshold`.
pub fn fuse_leading(
    appearance: &[(String, f32)],
    skill_region: Option<&[(String, f32)]>,
    first_skill: Option<&[(String, f32)]>,
    threshold: f32,
) -> RecognitionResult {
    let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
    let mut sources = 1u32;
    for (label, conf) in appearance {
        *sums.entry(label.as_str()).or_default() += *conf as f64;
    }
    for ranking in [skill_region, first_skill].into_iter().flatten() {
        sources += 1;
        for (label, conf) in ranking {
            *sums.entry(label.as_str()).or_default() += *conf as f64;
        }
    }
    // BTreeMap iteration is label-ascending, so strict comparison breaks
    // confidence ties toward the lexicographically smallest label.
    let mut winner: Option<(&str, f64)> = None;
    for (label, sum) in &sums {
        let fused = sum / sources as f64;
        if winner.map_or(true, |(_, best)| fused > best) {
            winner = Some((label, fused));
        }
    }
    match winner {
        Some((label, fused)) if fused as f32 >= threshold => RecognitionResult {
            label: label.to_string(),
            confidence: fused as f32,
            source: RoiSource::Fused,
        },
        Some((_, fused)) => RecognitionResult {
            label: UNKNOWN_LABEL.to_string(),
            confidence: fused as f32,
            source: RoiSource::Fused,
        },
        None => RecognitionResult {
            label: UNKNOWN_LABEL.to_string(),
            confidence: 0.0,
            source: RoiSource::Fused,
        },
    }
}

/// Classifiers for the three crop kinds. Only appearance is mandatory;
/// missing slots simply drop out of the fusion.
#[derive(Clone)]
pub struct ClassifierStack {
    pub appearance: Arc<dyn Classifier>,
    pub skill_region: Option<Arc<dyn Classifier>>,
    pub first_skill: Option<Arc<dyn Classifier>>,
}

impl ClassifierStack {
    pub fn appearance_only(classifier: Arc<dyn Classifier>) -> Self {
        ClassifierStack {
            appearance: classifier,
            skill_region: None,
            first_skill: None,
        }
    }
}

/// Thresholds and geometry knobs for recognition.
#[derive(Debug, Clone, Copy)]
pub struct RecognitionParams {
    /// Minimum fused confidence for the leading hero.
    pub fuse_threshold: f32,
    /// Minimum appearance confidence for other heroes.
    pub appearance_threshold: f32,
    /// Circle radius search range inside the skill region.
    pub circle_radii: (u32, u32),
    /// Gap between bar bottom and appearance crop.
    pub appearance_offset: u32,
}

impl Default for RecognitionParams {
    fn default() -> Self {
        RecognitionParams {
            fuse_threshold: 0.5,
            appearance_threshold: 0.5,
            circle_radii: DEFAULT_CIRCLE_RADII,
            appearance_offset: DEFAULT_APPEARANCE_OFFSET,
        }
    }
}

/// Extra detail kept for the leading (self) hero: the per-crop rankings
/// that went into the fused result.
#[derive(Debug, Clone)]
pub struct LeadingDetail {
    /// Index into [`FrameRecognition::results`].
    pub index: usize,
    pub appearance: Vec<(String, f32)>,
    pub skill_region: Option<Vec<(String, f32)>>,
    pub first_skill: Option<Vec<(String, f32)>>,
    pub fused: RecognitionResult,
}

/// Recognition outcome for one frame.
#[derive(Debug, Clone)]
pub struct FrameRecognition {
    /// One entry per detection, in detection order.
    pub results: Vec<(Detection, RecognitionResult)>,
    pub leading: Option<LeadingDetail>,
}

/// Recognizes every detection of a frame. `frame` must be the normalized
/// RGB frame the detections were made in, with detections sorted by score
/// descending (as [`crate::pipeline::Detector`] returns them).
///
/// The highest-scored self-camp detection is the leading hero: it gets
/// the skill-region and first-skill treatment plus fusion. Everything
/// else — friends, enemies, empty bars, any extra self detections — is
/// classified from appearance alone, with sub-threshold confidences
/// reported as [`UNKNOWN_LABEL`].
pub fn recognize_frame(
    frame: &RasterImage,
    detections: &[Detection],
    stack: &ClassifierStack,
    params: &RecognitionParams,
) -> Result<FrameRecognition> {
    let frame_dims = (frame.width(), frame.height());
    let leading_index = detections.iter().position(|d| d.camp == Camp::SelfHero);

    let mut results = Vec::with_capacity(detections.len());
    let mut leading = None;
    for (index, det) in detections.iter().enumerate() {
        let rect = appearance_rect(&det.bar, frame_dims, params.appearance_offset);
        let (crop_img, _) = crop(frame, &rect)?;
        let ranking = stack.appearance.classify(&crop_img)?;

        if leading_index == Some(index) {
            let region = skill_region_rect(frame_dims);
            let (region_img, _) = crop(frame, &region)?;
            let skill_ranking = match &stack.skill_region {
                Some(classifier) => Some(classifier.classify(&region_img)?),
                None => None,
            };

            let first_ranking = match &stack.first_skill {
                Some(classifier) => {
                    match first_skill_in_region(
                        &region_img,
                        params.circle_radii.0,
                        params.circle_radii.1,
                    ) {
                        Some(first_rect) => {
                            let (first_img, _) = crop(&region_img, &first_rect)?;
                            Some(classifier.classify(&first_img)?)
                        }
                        None => None,
                    }
                }
                None => None,
            };

            let fused = fuse_leading(
                &ranking,
                skill_ranking.as_deref(),
                first_ranking.as_deref(),
                params.fuse_threshold,
            );
            leading = Some(LeadingDetail {
                index,
                appearance: ranking,
                skill_region: skill_ranking,
                first_skill: first_ranking,
                fused: fused.clone(),
            });
            results.push((*det, fused));
        } else {
            let result = match ranking.first() {
                Some((label, conf)) if *conf >= params.appearance_threshold => RecognitionResult {
                    label: label.clone(),
                    confidence: *conf,
                    source: RoiSource::Appearance,
                },
                Some((_, conf)) => RecognitionResult {
                    label: UNKNOWN_LABEL.to_string(),
                    confidence: *conf,
                    source: RoiSource::Appearance,
                },
                None => RecognitionResult {
                    label: UNKNOWN_LABEL.to_string(),
                    confidence: 0.0,
                    source: RoiSource::Appearance,
                },
            };
            results.push((*det, result));
        }
    }
    Ok(FrameRecognition { results, leading })
}

/// Accumulated score of one hero name within one camp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeroTally {
    pub label: String,
    /// Sum of per-frame confidences.
    pub confidence: f64,
    /// Number of frames that contributed.
    pub frames: u32,
}

/// Per-camp ranking of hero names over a whole video.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VideoSummary {
    pub camps: BTreeMap<Camp, Vec<HeroTally>>,
}

/// Commutative fold of per-frame results: confidences sum per (camp,
/// label) pair, so partial accumulators can be merged in any order or
/// grouping without changing the outcome.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VideoAccumulator {
    totals: BTreeMap<(Camp, String), (f64, u32)>,
}

impl VideoAccumulator {
    pub fn new() -> Self {
        VideoAccumulator::default()
    }

    /// Adds one recognition result. [`UNKNOWN_LABEL`] results carry no
    /// hero name and are skipped.
    pub fn add(&mut self, camp: Camp, result: &RecognitionResult) {
        if result.label == UNKNOWN_LABEL {
            return;
        }
        let entry = self
            .totals
            .entry((camp, result.label.clone()))
            .or_insert((0.0, 0));
        entry.0 += result.confidence as f64;
        entry.1 += 1;
    }

    pub fn merge(mut self, other: VideoAccumulator) -> VideoAccumulator {
        for ((camp, label), (conf, frames)) in other.totals {
            let entry = self.totals.entry((camp, label)).or_insert((0.0, 0));
            entry.0 += conf;
            entry.1 += frames;
        }
        self
    }

    pub fn finish(self) -> VideoSummary {
        let mut camps: BTreeMap<Camp, Vec<HeroTally>> = BTreeMap::new();
        for ((camp, label), (confidence, frames)) in self.totals {
            camps.entry(camp).or_default().push(HeroTally {
                label,
                confidence,
                frames,
            });
        }
        for tallies in camps.values_mut() {
            tallies.sort_by(|a, b| {
                b.confidence
                    .total_cmp(&a.confidence)
                    .then_with(|| a.label.cmp(&b.label))
            });
        }
        VideoSummary { camps }
    }
}

/// Folds a stream of (camp, result) pairs into a [`VideoSummary`].
pub fn accumulate_video(
    results: impl IntoIterator<Item = (Camp, RecognitionResult)>,
) -> VideoSummary {
    let mut acc = VideoAccumulator::new();
    for (camp, result) in results {
        acc.add(camp, &result);
    }
    acc.finish()
}

#[derive(Serialize)]
struct BridgeRequest<'a> {
    image_path: &'a str,
    roi_type: &'a str,
}

#[derive(Deserialize)]
struct BridgeResponse {
    labels: Vec<String>,
    confidences: Vec<f32>,
}

#[derive(Debug)]
struct BridgeIo {
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// A classifier served by a subprocess.
///
/// Protocol: one JSON object per line on stdin,
/// `{"image_path": "...", "roi_type": "appearance"}`, answered by one
/// JSON object per line on stdout,
/// `{"labels": [...], "confidences": [...]}` with parallel arrays.
/// Requests are serialized through a mutex, so the bridge is safe to
/// share across threads even though the subprocess sees one request at a
/// time.
pub struct ExternalBridge {
    command: String,
    child: Mutex<Child>,
    io: Mutex<BridgeIo>,
}

impl std::fmt::Debug for ExternalBridge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalBridge")
            .field("command", &self.command)
            .finish_non_exhaustive()
    }
}

impl ExternalBridge {
    /// Spawns the bridge process. The command line is split on whitespace
    /// (no shell quoting).
    pub fn spawn(command_line: &str) -> Result<Arc<Self>> {
        let mut parts = command_line.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::invalid("empty bridge command"))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Classifier(format!("failed to spawn {command_line:?}: {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = BufReader::new(child.stdout.take().expect("stdout piped"));
        Ok(Arc::new(ExternalBridge {
            command: command_line.to_string(),
            child: Mutex::new(child),
            io: Mutex::new(BridgeIo { stdin, stdout }),
        }))
    }

    /// A [`Classifier`] view of this bridge for one crop kind.
    pub fn classifier(self: &Arc<Self>, roi: RoiType) -> BridgeClassifier {
        BridgeClassifier {
            bridge: Arc::clone(self),
            roi,
        }
    }

    fn request(&self, image_path: &str, roi: RoiType) -> Result<Vec<(String, f32)>> {
        let mut io = self.io.lock().expect("bridge io lock");
        let mut line = serde_json::to_string(&BridgeRequest {
            image_path,
            roi_type: roi.as_str(),
        })?;
        line.push('\n');
        io.stdin
            .write_all(line.as_bytes())
            .and_then(|_| io.stdin.flush())
            .map_err(|e| {
                Error::Classifier(format!("bridge {:?} write failed: {e}", self.command))
            })?;
        let mut response = String::new();
        let read = io.stdout.read_line(&mut response).map_err(|e| {
            Error::Classifier(format!("bridge {:?} read failed: {e}", self.command))
        })?;
        if read == 0 {
            return Err(Error::Classifier(format!(
                "bridge {:?} closed its stdout",
                self.command
            )));
        }
        let parsed: BridgeResponse = serde_json::from_str(&response)
            .map_err(|e| Error::Classifier(format!("bridge response not valid JSON: {e}")))?;
        if parsed.labels.len() != parsed.confidences.len() {
            return Err(Error::Classifier(format!(
                "bridge returned {} labels but {} confidences",
                parsed.labels.len(),
                parsed.confidences.len()
            )));
        }
        let mut ranking: Vec<(String, f32)> =
            parsed.labels.into_iter().zip(parsed.confidences).collect();
        ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        validate_ranking(&ranking)?;
        Ok(ranking)
    }
}

impl Drop for ExternalBridge {
    fn drop(&mut self) {
        if let Ok(mut child) = self.child.lock() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// One crop kind of an [`ExternalBridge`], usable wherever a
/// [`Classifier`] is expected.
#[derive(Debug, Clone)]
pub struct BridgeClassifier {
    bridge: Arc<ExternalBridge>,
    roi: RoiType,
}

impl Classifier for BridgeClassifier {
    fn classify(&self, image: &RasterImage) -> Result<Vec<(String, f32)>> {
        let file = tempfile::Builder::new()
            .prefix("hero-roi-")
            .suffix(".png")
            .tempfile()
            .map_err(|e| Error::Classifier(format!("bridge temp file: {e}")))?;
        image.save_png(file.path())?;
        let path = file
            .path()
            .to_str()
            .ok_or_else(|| Error::Classifier("bridge temp path is not valid UTF-8".into()))?;
        self.bridge.request(path, self.roi)
    }
}
