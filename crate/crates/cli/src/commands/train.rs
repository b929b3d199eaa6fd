//! `train-reference`: trains the nearest-centroid reference model from an
//! extracted sample set and reports held-out accuracy.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use heroscan_core::{
    load_samples, split_samples, train_reference, Classifier, RoiType, SamplesManifest,
};

use crate::output::{to_json_line, TrainOutput, SCHEMA_VERSION};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Sample set directory holding samples.json and the crop images.
    #[arg(value_name = "SAMPLES_DIR")]
    pub samples: PathBuf,
    /// Output model path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Crop kind to train on (appearance, skill_region, first_skill).
    #[arg(long, value_name = "ROI", default_value = "appearance", value_parser = parse_roi)]
    pub roi: RoiType,
    /// Fraction of each label's samples used for training; 1 trains on
    /// everything and skips the accuracy report.
    #[arg(long, default_value_t = 0.8, value_name = "F")]
    pub train_fraction: f64,
    /// Seed for the train/eval shuffle.
    #[arg(long, default_value_t = 17, value_name = "SEED")]
    pub seed: u64,
    /// Softmax temperature baked into the saved model.
    #[arg(long, default_value_t = 2.0, value_name = "T")]
    pub temperature: f32,
}

fn parse_roi(s: &str) -> Result<RoiType, String> {
    RoiType::parse(s).map_err(|e| e.to_string())
}

pub fn run(args: TrainArgs) -> Result<()> {
    let manifest_path = args.samples.join("samples.json");
    let manifest = SamplesManifest::load(&manifest_path)
        .with_context(|| format!("manifest {}", manifest_path.display()))?;

    // Every label present for this crop kind must survive into the model,
    // even if the split drops all its eval samples.
    let labels: Vec<String> = manifest
        .samples
        .iter()
        .filter(|s| s.roi == args.roi)
        .map(|s| s.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if labels.is_empty() {
        bail!(
            "no {} samples in {}",
            args.roi.as_str(),
            manifest_path.display()
        );
    }

    let (train_manifest, eval_manifest) = if args.train_fraction >= 1.0 {
        (manifest, SamplesManifest::default())
    } else {
        split_samples(&manifest, args.train_fraction, args.seed)?
    };

    let train_pairs = load_samples(&args.samples, &train_manifest, args.roi)?;
    let model = train_reference(&train_pairs, &labels)?.with_temperature(args.temperature)?;
    model.save(&args.out)?;

    let eval_pairs = load_samples(&args.samples, &eval_manifest, args.roi)?;
    let holdout_accuracy = if eval_pairs.is_empty() {
        None
    } else {
        let mut hits = 0usize;
        for (label, image) in &eval_pairs {
            let ranking = model.classify(image)?;
            if ranking.first().is_some_and(|(top, _)| top == label) {
                hits += 1;
            }
        }
        Some(hits as f64 / eval_pairs.len() as f64)
    };

    let doc = TrainOutput {
        schema: SCHEMA_VERSION,
        model: args.out.display().to_string(),
        labels: model.labels().to_vec(),
        train_samples: train_pairs.len(),
        eval_samples: eval_pairs.len(),
        holdout_accuracy,
    };
    print!("{}", to_json_line(&doc)?);
    Ok(())
}
