//! Pipeline configuration: documented defaults, an optional flat config
//! file with dotted keys (`nms.t_x = 33`), and command-line flags that
//! mirror every key. Precedence is defaults < file < flags.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use heroscan_core::{
    BloodBarTemplate, Classifier, ClassifierStack, Detector, DetectorParams, ExternalBridge,
    NmsParams, RecognitionParams, ReferenceClassifier, RoiType, ScoreParams,
};

/// Every tunable of the pipeline with its documented default. Fields map
/// 1:1 to config-file keys and to the long flags in [`ConfigArgs`].
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub score_alpha: f64,
    pub score_beta: f64,
    pub score_radius: u32,
    pub score_top_k: usize,
    pub score_threshold: f64,
    /// `None` means "derive from the template width" (half of it).
    pub nms_t_x: Option<u32>,
    pub nms_t_y: Option<u32>,
    pub camp_strip_width: u32,
    pub fuse_threshold: f32,
    pub appearance_threshold: f32,
    /// Reference model path for the appearance classifier.
    pub model: Option<PathBuf>,
    pub skill_model: Option<PathBuf>,
    pub first_skill_model: Option<PathBuf>,
    /// External classifier subprocess command line; exclusive with models.
    pub bridge: Option<String>,
    pub stride: usize,
    pub window_w_frac: f64,
    pub window_h_frac: f64,
    pub every_n_frames: usize,
    /// Directory holding `template.png` + `template_mask.png`; `None`
    /// uses the built-in template.
    pub template_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let score = ScoreParams::default();
        let recognition = RecognitionParams::default();
        PipelineConfig {
            score_alpha: score.alpha,
            score_beta: score.beta,
            score_radius: score.radius,
            score_top_k: score.top_k,
            score_threshold: score.score_threshold,
            nms_t_x: None,
            nms_t_y: None,
            camp_strip_width: DetectorParams::default().camp_strip_width,
            fuse_threshold: recognition.fuse_threshold,
            appearance_threshold: recognition.appearance_threshold,
            model: None,
            skill_model: None,
            first_skill_model: None,
            bridge: None,
            stride: 10,
            window_w_frac: 0.5,
            window_h_frac: 0.6,
            every_n_frames: 10,
            template_dir: None,
        }
    }
}

/// Flags shared by every subcommand that runs the pipeline. Each long
/// flag mirrors one config-file key; a flag given on the command line
/// wins over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Config file with one dotted key per line, e.g. `nms.t_x = 33`.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Weight of the peak value in the candidate score (key score.alpha).
    #[arg(long, value_name = "F")]
    pub score_alpha: Option<f64>,
    /// Weight of the contrast term in the candidate score (key score.beta).
    #[arg(long, value_name = "F")]
    pub score_beta: Option<f64>,
    /// Maximum-filter radius in pixels (key score.radius).
    #[arg(long, value_name = "PX")]
    pub score_radius: Option<u32>,
    /// Candidate count cap before scoring (key score.top_k).
    #[arg(long, value_name = "N")]
    pub score_top_k: Option<usize>,
    /// Minimum candidate score (key score.threshold).
    #[arg(long, value_name = "F")]
    pub score_threshold: Option<f64>,
    /// Horizontal suppression threshold in pixels (key nms.t_x).
    #[arg(long, value_name = "PX")]
    pub nms_t_x: Option<u32>,
    /// Vertical suppression threshold in pixels (key nms.t_y).
    #[arg(long, value_name = "PX")]
    pub nms_t_y: Option<u32>,
    /// Width of the fill strip sampled for camp classification
    /// (key camp.strip_width).
    #[arg(long, value_name = "PX")]
    pub camp_strip_width: Option<u32>,
    /// Minimum fused confidence for the leading hero
    /// (key recognition.fuse_threshold).
    #[arg(long, value_name = "F")]
    pub fuse_threshold: Option<f32>,
    /// Minimum appearance confidence for non-leading heroes
    /// (key recognition.appearance_threshold).
    #[arg(long, value_name = "F")]
    pub appearance_threshold: Option<f32>,
    /// Reference model for the appearance classifier (key classifier.model).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Reference model for the skill-region classifier
    /// (key classifier.skill_model).
    #[arg(long, value_name = "FILE")]
    pub skill_model: Option<PathBuf>,
    /// Reference model for the first-skill classifier
    /// (key classifier.first_skill_model).
    #[arg(long, value_name = "FILE")]
    pub first_skill_model: Option<PathBuf>,
    /// External classifier command line (key classifier.bridge).
    #[arg(long, value_name = "CMD")]
    pub bridge: Option<String>,
    /// Sample every Nth frame for video summaries (key video.stride).
    #[arg(long, value_name = "N")]
    pub stride: Option<usize>,
    /// Central-window width fraction for sample extraction
    /// (key dataset.window_w_frac).
    #[arg(long, value_name = "F")]
    pub window_w_frac: Option<f64>,
    /// Central-window height fraction for sample extraction
    /// (key dataset.window_h_frac).
    #[arg(long, value_name = "F")]
    pub window_h_frac: Option<f64>,
    /// Use every Nth frame during sample extraction
    /// (key dataset.every_n_frames).
    #[arg(long, value_name = "N")]
    pub every_n_frames: Option<usize>,
    /// Directory with template.png + template_mask.png (key template.dir).
    #[arg(long, value_name = "DIR")]
    pub template_dir: Option<PathBuf>,
}

impl PipelineConfig {
    /// Defaults, overlaid with the config file (if given), overlaid with
    /// explicit flags.
    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let mut config = PipelineConfig::default();
        if let Some(path) = &args.config {
            config
                .apply_file(path)
                .with_context(|| format!("config file {}", path.display()))?;
        }
        config.apply_flags(args);
        Ok(config)
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", index + 1))?;
            self.set(key.trim(), unquote(value.trim()))
                .with_context(|| format!("line {}", index + 1))?;
        }
        Ok(())
    }

    /// Applies one dotted config key. Unknown keys are an error, so a
    /// typo can never silently fall back to a default.
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| anyhow!("key {key}: invalid value {value:?}: {e}"))
        }
        match key {
            "score.alpha" => self.score_alpha = parse(key, value)?,
            "score.beta" => self.score_beta = parse(key, value)?,
            "score.radius" => self.score_radius = parse(key, value)?,
            "score.top_k" => self.score_top_k = parse(key, value)?,
            "score.threshold" => self.score_threshold = parse(key, value)?,
            "nms.t_x" => self.nms_t_x = Some(parse(key, value)?),
            "nms.t_y" => self.nms_t_y = Some(parse(key, value)?),
            "camp.strip_width" => self.camp_strip_width = parse(key, value)?,
            "recognition.fuse_threshold" => self.fuse_threshold = parse(key, value)?,
            "recognition.appearance_threshold" => self.appearance_threshold = parse(key, value)?,
            "classifier.model" => self.model = Some(PathBuf::from(value)),
            "classifier.skill_model" => self.skill_model = Some(PathBuf::from(value)),
            "classifier.first_skill_model" => self.first_skill_model = Some(PathBuf::from(value)),
            "classifier.bridge" => self.bridge = Some(value.to_string()),
            "video.stride" => self.stride = parse(key, value)?,
            "dataset.window_w_frac" => self.window_w_frac = parse(key, value)?,
            "dataset.window_h_frac" => self.window_h_frac = parse(key, value)?,
            "dataset.every_n_frames" => self.every_n_frames = parse(key, value)?,
            "template.dir" => self.template_dir = Some(PathBuf::from(value)),
            _ => bail!("unknown config key {key:?}"),
        }
        Ok(())
    }

    fn apply_flags(&mut self, args: &ConfigArgs) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &args.$field {
                    self.$field = Some(v.clone());
                }
            };
        }
        if let Some(v) = args.score_alpha {
            self.score_alpha = v;
        }
        if let Some(v) = args.score_beta {
            self.score_beta = v;
        }
        if let Some(v) = args.score_radius {
            self.score_radius = v;
        }
        if let Some(v) = args.score_top_k {
            self.score_top_k = v;
        }
        if let Some(v) = args.score_threshold {
            self.score_threshold = v;
        }
        if args.nms_t_x.is_some() {
            self.nms_t_x = args.nms_t_x;
        }
        if args.nms_t_y.is_some() {
            self.nms_t_y = args.nms_t_y;
        }
        if let Some(v) = args.camp_strip_width {
            self.camp_strip_width = v;
        }
        if let Some(v) = args.fuse_threshold {
            self.fuse_threshold = v;
        }
        if let Some(v) = args.appearance_threshold {
            self.appearance_threshold = v;
        }
        take!(model);
        take!(skill_model);
        take!(first_skill_model);
        take!(bridge);
        if let Some(v) = args.stride {
            self.stride = v;
        }
        if let Some(v) = args.window_w_frac {
            self.window_w_frac = v;
        }
        if let Some(v) = args.window_h_frac {
            self.window_h_frac = v;
        }
        if let Some(v) = args.every_n_frames {
            self.every_n_frames = v;
        }
        take!(template_dir);
    }

    pub fn score_params(&self) -> ScoreParams {
        ScoreParams {
            alpha: self.score_alpha,
            beta: self.score_beta,
            radius: self.score_radius,
            top_k: self.score_top_k,
            score_threshold: self.score_threshold,
        }
    }

    fn template(&self) -> Result<BloodBarTemplate> {
        match &self.template_dir {
            None => Ok(BloodBarTemplate::builtin()),
            Some(dir) => BloodBarTemplate::from_png_pair(
                dir.join("template.png"),
                dir.join("template_mask.png"),
            )
            .with_context(|| format!("template pair in {}", dir.display())),
        }
    }

    /// Builds the detector this configuration describes.
    pub fn detector(&self) -> Result<Detector> {
        let template = self.template()?;
        let nms = if self.nms_t_x.is_none() && self.nms_t_y.is_none() {
            None
        } else {
            let defaults = NmsParams::for_template_width(template.width());
            Some(NmsParams {
                t_x: self.nms_t_x.unwrap_or(defaults.t_x),
                t_y: self.nms_t_y.unwrap_or(defaults.t_y),
            })
        };
        let params = DetectorParams {
            score: self.score_params(),
            nms,
            camp_strip_width: self.camp_strip_width,
        };
        Ok(Detector::new(template, params)?)
    }

    pub fn recognition_params(&self) -> RecognitionParams {
        RecognitionParams {
            fuse_threshold: self.fuse_threshold,
            appearance_threshold: self.appearance_threshold,
            ..RecognitionParams::default()
        }
    }

    /// Builds the classifier stack selected by this configuration. The
    /// returned bridge handle (when an external bridge is used) owns the
    /// subprocess and must be kept alive while classification runs.
    pub fn classifier_stack(&self) -> Result<(ClassifierStack, Option<Arc<ExternalBridge>>)> {
        let has_model = self.model.is_some();
        match (&self.bridge, has_model) {
            (Some(_), true) => {
                bail!("classifier.model and classifier.bridge are mutually exclusive")
            }
            (Some(command), false) => {
                let bridge = ExternalBridge::spawn(command)?;
                let stack = ClassifierStack {
                    appearance: Arc::new(bridge.classifier(RoiType::Appearance)),
                    skill_region: Some(Arc::new(bridge.classifier(RoiType::SkillRegion))),
                    first_skill: Some(Arc::new(bridge.classifier(RoiType::FirstSkill))),
                };
                Ok((stack, Some(bridge)))
            }
            (None, true) => {
                let load = |path: &PathBuf| -> Result<Arc<dyn Classifier>> {
                    let model = ReferenceClassifier::load(path)
                        .with_context(|| format!("classifier model {}", path.display()))?;
                    Ok(Arc::new(model))
                };
                let stack = ClassifierStack {
                    appearance: load(self.model.as_ref().unwrap())?,
                    skill_region: match &self.skill_model {
                        Some(path) => Some(load(path)?),
                        None => None,
                    },
                    first_skill: match &self.first_skill_model {
                        Some(path) => Some(load(path)?),
                        None => None,
                    },
                };
                Ok((stack, None))
            }
            (None, false) => bail!(
                "no classifier configured; set classifier.model or classifier.bridge \
                 (flags --model / --bridge)"
            ),
        }
    }
}

fn unquote(value: &str) -> &str {
    let bytes = value.as_bytes();
    if bytes.len() >= 2 && bytes[0] == b'"' && bytes[bytes.len() - 1] == b'"' {
        &value[1..value.len() - 1]
    } else {
        value
    }
}
