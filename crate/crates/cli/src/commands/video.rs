//! `video-summary`: per-camp hero tallies over a directory of frames.
//!
//! A "video" here is a directory of PNG frames in lexicographic name
//! order (decode containers beforehand, e.g. with ffmpeg). Every
//! `video.stride`-th frame runs through detection + recognition and the
//! per-frame results fold into one tally per (camp, label) pair.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use heroscan_core::{accumulate_video, recognize_frame, Camp, RecognitionResult};

use crate::config::{ConfigArgs, PipelineConfig};
use crate::frames::{list_frames, run_ordered};
use crate::output::{to_json_line, VideoOutput, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct VideoArgs {
    /// Directory of PNG frames, processed in file-name order.
    #[arg(value_name = "FRAME_DIR")]
    pub dir: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Worker threads; the summary is order-independent either way.
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub jobs: usize,
    /// Also write the JSON document to a file.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

pub fn run(args: VideoArgs) -> Result<()> {
    let config = PipelineConfig::resolve(&args.config)?;
    let detector = config.detector()?;
    let (stack, bridge) = config.classifier_stack()?;
    let params = config.recognition_params();

    let all_frames = list_frames(&args.dir)?;
    let stride = config.stride.max(1);
    let sampled: Vec<PathBuf> = all_frames.iter().step_by(stride).cloned().collect();

    let per_frame: Vec<Vec<(Camp, RecognitionResult)>> =
        run_ordered(&sampled, args.jobs, |path| {
            let image = heroscan_core::RasterImage::load_png(path)
                .with_context(|| format!("frame {}", path.display()))?;
            let detected = detector.detect(&image)?;
            let recognition =
                recognize_frame(&detected.frame.image, &detected.detections, &stack, &params)?;
            Ok(recognition
                .results
                .into_iter()
                .map(|(det, res)| (det.camp, res))
                .collect())
        })?;
    drop(bridge);

    let summary = accumulate_video(per_frame.into_iter().flatten());
    let doc = VideoOutput {
        schema: SCHEMA_VERSION,
        frames_total: all_frames.len(),
        frames_processed: sampled.len(),
        stride,
        camps: summary.camps,
    };
    let text = to_json_line(&doc)?;
    if let Some(path) = &args.output {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{text}");
    Ok(())
}
