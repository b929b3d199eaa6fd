//! `detect`: blood bar detection over frame images, JSON to stdout.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use heroscan_core::{Detector, RasterImage};

use crate::config::{ConfigArgs, PipelineConfig};
use crate::frames::run_ordered;
use crate::output::{to_json_line, DetectFrameOut, DetectOutput, DetectionOut, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct DetectArgs {
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

/// Detects bars in one frame and maps them back to source coordinates.
pub fn detect_frame(detector: &Detector, path: &Path) -> Result<DetectFrameOut> {
    let image = RasterImage::load_png(path).with_context(|| format!("frame {}", path.display()))?;
    let result = detector.detect(&image)?;
    let detections = result
        .detections
        .iter()
        .map(|d| DetectionOut {
            bbox: result.source_rect(&d.bar),
            camp: d.camp,
            score: d.score,
            value: d.value,
        })
        .collect();
    Ok(DetectFrameOut {
        path: path.display().to_string(),
        width: image.width(),
        height: image.height(),
        detections,
    })
}

pub fn run(args: DetectArgs) -> Result<()> {
    let config = PipelineConfig::resolve(&args.config)?;
    let detector = config.detector()?;
    let frames = run_ordered(&args.frames, args.jobs, |path| {
        detect_frame(&detector, path)
    })?;
    let doc = DetectOutput {
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
