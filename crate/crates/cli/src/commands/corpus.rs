//! `render-corpus`: deterministic synthetic frames plus ground truth.
//!
//! Default mode renders independent scenes for benchmarking; `--video`
//! renders a frame sequence with one constant self hero, which is what
//! `extract-samples` and `video-summary` expect as input. Both modes
//! write `frames/NNNN.png` files and a `manifest.json` with per-frame
//! ground truth into the output directory.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use heroscan_core::{
    render, render_corpus, video_scene_spec, CorpusManifest, CorpusParams, SceneRecord, VideoParams,
};

use crate::output::{to_json_line, RenderCorpusOutput, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Output directory; receives frames/ and manifest.json.
    #[arg(value_name = "OUT_DIR")]
    pub out: PathBuf,
    /// Number of scenes (frames in --video mode).
    #[arg(long, default_value_t = 50, value_name = "N")]
    pub scenes: usize,
    /// Seed for all scene randomness.
    #[arg(long, default_value_t = 7, value_name = "SEED")]
    pub seed: u64,
    /// Source resolutions cycled scene by scene, e.g. 1280x720,1920x1080.
    #[arg(long, value_name = "WxH", value_delimiter = ',', value_parser = parse_dim)]
    pub dims: Vec<(u32, u32)>,
    /// Hero labels drawn onto the sprites.
    #[arg(long, value_name = "LABEL", value_delimiter = ',')]
    pub labels: Vec<String>,
    /// Probability that a scene carries shop-style clutter chrome.
    #[arg(long, default_value_t = 0.3, value_name = "P")]
    pub clutter_prob: f64,
    /// Render a frame sequence with a constant self hero instead of
    /// independent scenes.
    #[arg(long)]
    pub video: bool,
    /// Video mode: label of the constant self hero.
    #[arg(long, default_value = "arthur", value_name = "LABEL")]
    pub self_label: String,
    /// Video mode: labels cycled for friendly bars.
    #[arg(long, value_name = "LABEL", value_delimiter = ',')]
    pub friend_labels: Vec<String>,
    /// Video mode: labels cycled for enemy bars.
    #[arg(long, value_name = "LABEL", value_delimiter = ',')]
    pub enemy_labels: Vec<String>,
    /// Video mode: frame height in pixels (width follows 16:9).
    #[arg(long, default_value_t = 720, value_name = "PX")]
    pub height: u32,
}

fn parse_dim(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w.trim().parse().map_err(|e| format!("width {w:?}: {e}"))?;
    let h = h.trim().parse().map_err(|e| format!("height {h:?}: {e}"))?;
    Ok((w, h))
}

/// Renders a synthetic video with the corpus directory layout, so bench
/// and summary tooling can consume either kind interchangeably.
fn render_video(dir: &Path, params: &VideoParams) -> Result<CorpusManifest> {
    let frames_dir = dir.join("frames");
    std::fs::create_dir_all(&frames_dir)
        .with_context(|| format!("creating {}", frames_dir.display()))?;
    let mut scenes = Vec::with_capacity(params.frames);
    for index in 0..params.frames {
        let spec = video_scene_spec(params, index);
        let (image, truth) = render(&spec)?;
        let name = format!("frames/{index:04}.png");
        image.save_png(dir.join(&name))?;
        scenes.push(SceneRecord { image: name, truth });
    }
    let manifest = CorpusManifest {
        schema: SCHEMA_VERSION,
        seed: params.seed,
        scenes,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&manifest)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(manifest)
}

pub fn run(args: CorpusArgs) -> Result<()> {
    let manifest = if args.video {
        let defaults = VideoParams::default();
        let params = VideoParams {
            frames: args.scenes,
            seed: args.seed,
            height: args.height,
            self_label: args.self_label.clone(),
            friend_labels: if args.friend_labels.is_empty() {
                defaults.friend_labels
            } else {
                args.friend_labels.clone()
            },
            enemy_labels: if args.enemy_labels.is_empty() {
                defaults.enemy_labels
            } else {
                args.enemy_labels.clone()
            },
        };
        render_video(&args.out, &params)?
    } else {
        let defaults = CorpusParams::default();
        let params = CorpusParams {
            scenes: args.scenes,
            seed: args.seed,
            dims: if args.dims.is_empty() {
                defaults.dims
            } else {
                args.dims.clone()
            },
            labels: if args.labels.is_empty() {
                defaults.labels
            } else {
                args.labels.clone()
            },
            clutter_probability: args.clutter_prob,
        };
        render_corpus(&args.out, &params)?
    };
    let doc = RenderCorpusOutput {
        schema: SCHEMA_VERSION,
        dir: args.out.display().to_string(),
        scenes: manifest.scenes.len(),
        manifest: args.out.join("manifest.json").display().to_string(),
    };
    print!("{}", to_json_line(&doc)?);
    Ok(())
}
