//! `extract-samples`: automatic training-crop extraction from footage of
//! one known hero. Crops land in `<label>/<roi>/<frame_id>.png` under the
//! sample directory, and `samples.json` records every crop. Re-running
//! with new footage merges into the existing manifest; a record is
//! replaced when its crop file is written again.

use std::collections::HashSet;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use heroscan_core::{extract_leading_samples, ExtractParams, RoiType, SamplesManifest};

use crate::config::{ConfigArgs, PipelineConfig};
use crate::frames::list_frames;
use crate::output::{to_json_line, ExtractOutput, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory of PNG frames recorded while playing one known hero.
    #[arg(value_name = "FRAME_DIR")]
    pub frames: PathBuf,
    /// Hero label assigned to every accepted crop.
    #[arg(long, value_name = "LABEL")]
    pub label: String,
    /// Sample set directory; receives the crops and samples.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Crop kinds to extract (appearance, skill_region, first_skill).
    #[arg(
        long,
        value_name = "ROI",
        value_delimiter = ',',
        value_parser = parse_roi,
        default_value = "appearance"
    )]
    pub rois: Vec<RoiType>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

fn parse_roi(s: &str) -> Result<RoiType, String> {
    RoiType::parse(s).map_err(|e| e.to_string())
}

pub fn run(args: ExtractArgs) -> Result<()> {
    let config = PipelineConfig::resolve(&args.config)?;
    let detector = config.detector()?;
    let params = ExtractParams {
        window_w_frac: config.window_w_frac,
        window_h_frac: config.window_h_frac,
        rois: args.rois.clone(),
        recognition: config.recognition_params(),
    };

    let all_frames = list_frames(&args.frames)?;
    let every = config.every_n_frames.max(1);
    let sampled: Vec<PathBuf> = all_frames.iter().step_by(every).cloned().collect();

    let fresh = extract_leading_samples(&sampled, &args.label, &args.out, &detector, &params)?;
    let written = fresh.samples.len();

    let manifest_path = args.out.join("samples.json");
    let merged = if manifest_path.exists() {
        let existing = SamplesManifest::load(&manifest_path)
            .with_context(|| format!("manifest {}", manifest_path.display()))?;
        let rewritten: HashSet<&str> = fresh.samples.iter().map(|s| s.image.as_str()).collect();
        let kept = SamplesManifest::new(
            existing
                .samples
                .into_iter()
                .filter(|s| !rewritten.contains(s.image.as_str()))
                .collect(),
        );
        SamplesManifest::merge([kept, fresh])
    } else {
        fresh
    };
    merged.save(&manifest_path)?;

    let doc = ExtractOutput {
        schema: SCHEMA_VERSION,
        out_dir: args.out.display().to_string(),
        frames_seen: sampled.len(),
        samples_written: written,
        manifest: manifest_path.display().to_string(),
    };
    print!("{}", to_json_line(&doc)?);
    Ok(())
}
