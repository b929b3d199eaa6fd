//! `recognize`: detection plus hero-identity classification per frame.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use heroscan_core::{recognize_frame, ClassifierStack, Detector, RasterImage, RecognitionParams};

use crate::config::{ConfigArgs, PipelineConfig};
use crate::frames::run_ordered;
use crate::output::{
    ranking_out, to_json_line, HeroOut, LeadingOut, RecognizeFrameOut, RecognizeOutput,
    SCHEMA_VERSION,
};

#[derive(Debug, Args)]
pub struct RecognizeArgs {
    /// Frame images to scan.
    #[arg(required = true, value_name = "FRAME")]
    pub frames: Vec<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Worker threads; output order always follows input order.
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub jobs: usize,
    /// Also write the JSON document to a file.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// Runs detection + recognition on one frame.
pub fn recognize_one(
    detector: &Detector,
    stack: &ClassifierStack,
    params: &RecognitionParams,
    path: &Path,
) -> Result<RecognizeFrameOut> {
    let image = RasterImage::load_png(path).with_context(|| format!("frame {}", path.display()))?;
    let detected = detector.detect(&image)?;
    let recognition = recognize_frame(&detected.frame.image, &detected.detections, stack, params)?;
    let heroes = recognition
        .results
        .iter()
        .map(|(det, res)| HeroOut {
            bbox: detected.source_rect(&det.bar),
            camp: det.camp,
            score: det.score,
            label: res.label.clone(),
            confidence: res.confidence,
            source: res.source,
        })
        .collect();
    let leading = recognition.leading.as_ref().map(|detail| LeadingOut {
        index: detail.index,
        appearance: ranking_out(&detail.appearance),
        skill_region: detail.skill_region.as_deref().map(ranking_out),
        first_skill: detail.first_skill.as_deref().map(ranking_out),
        fused: detail.fused.clone(),
    });
    Ok(RecognizeFrameOut {
        path: path.display().to_string(),
        width: image.width(),
        height: image.height(),
        heroes,
        leading,
    })
}

pub fn run(args: RecognizeArgs) -> Result<()> {
    let config = PipelineConfig::resolve(&args.config)?;
    let detector = config.detector()?;
    let (stack, bridge) = config.classifier_stack()?;
    let params = config.recognition_params();
    let frames = run_ordered(&args.frames, args.jobs, |path| {
        recognize_one(&detector, &stack, &params, path)
    })?;
    drop(bridge);
    let doc = RecognizeOutput {
        schema: SCHEMA_VERSION,
        frames,
    };
    let text = to_json_line(&doc)?;
    if let Some(path) = &args.output {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{text}");
    Ok(())
}
