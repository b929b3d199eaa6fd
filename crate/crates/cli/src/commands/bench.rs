//! `bench`: detection quality and latency over a rendered corpus.
//!
//! Detections are matched to ground-truth bars greedily in descending
//! score order; a pair matches when the bbox centers lie within
//! [`MATCH_RADIUS_PX`] in source coordinates and the camps agree. Bars
//! whose expected camp is undefined (fill too thin) act as ignore zones:
//! detections landing on them count neither as hits nor as false
//! positives. Frames run sequentially so per-frame latency is meaningful.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use heroscan_core::{CorpusManifest, RasterImage, Rect};

use crate::config::{ConfigArgs, PipelineConfig};
use crate::output::{to_json_line, BenchOutput, SCHEMA_VERSION};

/// Maximum center distance for a detection/truth match, source pixels.
pub const MATCH_RADIUS_PX: f64 = 5.0;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Corpus directory holding manifest.json and frames/.
    #[arg(value_name = "CORPUS_DIR")]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also write the JSON document to a file.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

fn center_distance(a: &Rect, b: &Rect) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}

/// Nearest-rank percentile of an ascending-sorted sample.
fn percentile(sorted_ms: &[f64], q: f64) -> f64 {
    if sorted_ms.is_empty() {
        return 0.0;
    }
    let rank = (q * sorted_ms.len() as f64).ceil() as usize;
    sorted_ms[rank.clamp(1, sorted_ms.len()) - 1]
}

pub fn run(args: BenchArgs) -> Result<()> {
    let config = PipelineConfig::resolve(&args.config)?;
    let detector = config.detector()?;

    let manifest_path = args.corpus.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path)
        .with_context(|| format!("manifest {}", manifest_path.display()))?;
    let manifest: CorpusManifest = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
    if manifest.scenes.is_empty() {
        bail!("corpus {} has no scenes", args.corpus.display());
    }

    let mut truth_bars = 0usize;
    let mut detections_total = 0usize;
    let mut matched = 0usize;
    let mut false_positives = 0usize;
    let mut max_center_error = 0.0f64;
    let mut times_ms = Vec::with_capacity(manifest.scenes.len());

    for scene in &manifest.scenes {
        let path = args.corpus.join(&scene.image);
        let image =
            RasterImage::load_png(&path).with_context(|| format!("frame {}", path.display()))?;

        let start = Instant::now();
        let result = detector.detect(&image)?;
        times_ms.push(start.elapsed().as_secs_f64() * 1e3);

        detections_total += result.detections.len();
        let scored: Vec<(Rect, heroscan_core::Camp, f32)> = result
            .detections
            .iter()
            .map(|d| (result.source_rect(&d.bar), d.camp, d.score))
            .collect();
        let mut order: Vec<usize> = (0..scored.len()).collect();
        order.sort_by(|&a, &b| scored[b].2.total_cmp(&scored[a].2));

        let expected: Vec<_> = scene
            .truth
            .bars
            .iter()
            .filter(|bar| bar.expected.is_some())
            .collect();
        let ignored: Vec<_> = scene
            .truth
            .bars
            .iter()
            .filter(|bar| bar.expected.is_none())
            .collect();
        truth_bars += expected.len();

        let mut taken = vec![false; expected.len()];
        for &di in &order {
            let (rect, camp, _) = &scored[di];
            let mut best: Option<(usize, f64)> = None;
            for (ti, bar) in expected.iter().enumerate() {
                if taken[ti] || bar.expected != Some(*camp) {
                    continue;
                }
                let dist = center_distance(rect, &bar.source_rect);
                if dist <= MATCH_RADIUS_PX && best.map_or(true, |(_, d)| dist < d) {
                    best = Some((ti, dist));
                }
            }
            match best {
                Some((ti, dist)) => {
                    taken[ti] = true;
                    matched += 1;
                    max_center_error = max_center_error.max(dist);
                }
                None => {
                    let near_ignored = ignored
                        .iter()
                        .any(|bar| center_distance(rect, &bar.source_rect) <= MATCH_RADIUS_PX);
                    if !near_ignored {
                        false_positives += 1;
                    }
                }
            }
        }
    }

    let considered = matched + false_positives;
    let precision = if considered == 0 {
        1.0
    } else {
        matched as f64 / considered as f64
    };
    let recall = if truth_bars == 0 {
        1.0
    } else {
        matched as f64 / truth_bars as f64
    };
    let mean_ms = times_ms.iter().sum::<f64>() / times_ms.len() as f64;
    let mut sorted_ms = times_ms.clone();
    sorted_ms.sort_by(f64::total_cmp);

    let doc = BenchOutput {
        schema: SCHEMA_VERSION,
        frames: manifest.scenes.len(),
        truth_bars,
        detections: detections_total,
        matched,
        precision,
        recall,
        max_center_error_px: max_center_error,
        mean_ms,
        p50_ms: percentile(&sorted_ms, 0.50),
        p90_ms: percentile(&sorted_ms, 0.90),
        p99_ms: percentile(&sorted_ms, 0.99),
    };
    let text = to_json_line(&doc)?;
    if let Some(path) = &args.output {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{text}");
    Ok(())
}
