//! Measures detector quality and speed on synthetic corpora. Run this
//! after touching the matcher, scoring defaults or the renderer to check
//! that precision/recall, camp accuracy and latency still have margin.
//!
//! ```text
//! cargo run --release -p heroscan-core --example calibrate
//! ```

use std::time::Instant;

use heroscan_core::{
    corpus_scene_spec, find_local_maxima, masked_match, normalize_height, rank_and_score, render,
    shop_scene, to_grayscale, BloodBarTemplate, CorpusParams, Detector, ScoreParams,
    NORMALIZED_HEIGHT,
};

fn main() {
    let params = CorpusParams {
        scenes: 200,
        seed: 2024,
        ..CorpusParams::default()
    };
    let detector = Detector::with_defaults();

    let mut truth_bars = 0usize;
    let mut matched = 0usize;
    let mut false_positives = 0usize;
    let mut camp_correct = 0usize;
    let mut camp_scored = 0usize;
    let mut worst_center_err = 0.0f64;
    let mut min_true_score = f32::INFINITY;

    for index in 0..params.scenes {
        let spec = corpus_scene_spec(&params, index);
        let (image, truth) = render(&spec).expect("render scene");
        let frame = detector.detect(&image).expect("detect");

        let mut used = vec![false; frame.detections.len()];
        for bar in &truth.bars {
            truth_bars += 1;
            let (tx, ty) = bar.normalized_rect.center();
            let hit = frame.detections.iter().enumerate().find(|(i, d)| {
                let (dx, dy) = d.bar.center();
                !used[*i] && (dx - tx).abs() <= 2.0 && (dy - ty).abs() <= 2.0
            });
            if let Some((i, d)) = hit {
                used[i] = true;
                matched += 1;
                let (dx, dy) = d.bar.center();
                worst_center_err = worst_center_err.max((dx - tx).abs().max((dy - ty).abs()));
                min_true_score = min_true_score.min(d.score);
                if let Some(expected) = bar.expected {
                    camp_scored += 1;
                    if d.camp == expected {
                        camp_correct += 1;
                    }
                }
            } else {
                eprintln!(
                    "scene {index}: missed bar at {:?} (camp {:?}, fill {:.2})",
                    bar.normalized_rect, bar.camp, bar.fill
                );
            }
        }
        for (i, d) in frame.detections.iter().enumerate() {
            if !used[i] {
                false_positives += 1;
                eprintln!(
                    "scene {index}: false positive at {:?} (camp {:?}, score {:.3}, value {:.3})",
                    d.bar, d.camp, d.score, d.value
                );
            }
        }
    }

    let recall = matched as f64 / truth_bars as f64;
    let precision = matched as f64 / (matched + false_positives) as f64;
    println!("corpus: {} scenes, {truth_bars} bars", params.scenes);
    println!("  recall      {recall:.4} ({matched}/{truth_bars})");
    println!("  precision   {precision:.4} ({false_positives} false positives)");
    println!(
        "  camp acc    {:.4} ({camp_correct}/{camp_scored})",
        camp_correct as f64 / camp_scored as f64
    );
    println!("  max center error {worst_center_err:.2} px");
    println!("  min matched score {min_true_score:.3}");

    // Shop screens: bar-shaped chrome only, every detection is a defect.
    let mut shop_detections = 0usize;
    for seed in 0..20u64 {
        let (image, _) = render(&shop_scene(seed)).expect("render shop");
        for d in detector.detect(&image).expect("detect").detections {
            shop_detections += 1;
            eprintln!(
                "shop seed {seed}: leak at {:?} score {:.3} value {:.3}",
                d.bar, d.score, d.value
            );
        }
    }
    println!("shop scenes: {shop_detections} detections across 20 frames (want 0)");

    // Strongest non-bar candidate before camp filtering, across the whole
    // corpus plus the shop scenes: shows the margin under the score
    // threshold and is the basis for the frozen default.
    let template = BloodBarTemplate::builtin();
    let score_params = ScoreParams::default();
    let mut max_background_score = f32::NEG_INFINITY;
    let mut background_scores: Vec<f32> = Vec::new();
    let specs = (0..params.scenes)
        .map(|i| corpus_scene_spec(&params, i))
        .chain((0..20u64).map(shop_scene));
    for spec in specs {
        let (image, truth) = render(&spec).expect("render scene");
        let normalized = normalize_height(&image, NORMALIZED_HEIGHT).expect("normalize");
        let gray = to_grayscale(&normalized.image);
        let map = masked_match(&gray, &template).expect("match");
        let maxima = find_local_maxima(&map, score_params.radius);
        let ranked = rank_and_score(&map, maxima, &score_params);
        for cand in ranked {
            let near_truth = truth.bars.iter().any(|b| {
                (cand.x as f64 + 32.0 - b.normalized_rect.center().0).abs() <= 4.0
                    && (cand.y as f64 + 8.0 - b.normalized_rect.center().1).abs() <= 4.0
            });
            let near_clutter = spec
                .clutter
                .iter()
                .any(|c| (cand.x as i32 - c.x).abs() <= 4 && (cand.y as i32 - c.y).abs() <= 4);
            if !near_truth && !near_clutter {
                background_scores.push(cand.score);
                max_background_score = max_background_score.max(cand.score);
            }
        }
    }
    background_scores.sort_by(f32::total_cmp);
    let pct = |p: f64| background_scores[(background_scores.len() as f64 * p) as usize];
    println!(
        "background candidates over {} scenes: n={}, p50={:.3}, p90={:.3}, p99={:.3}, max={:.3}",
        params.scenes + 20,
        background_scores.len(),
        pct(0.5),
        pct(0.9),
        pct(0.99),
        max_background_score
    );

    // Detection latency on distinct 720p frames.
    let frames: Vec<_> = (0..100)
        .map(|i| {
            let spec = corpus_scene_spec(
                &CorpusParams {
                    dims: vec![(1280, 720)],
                    seed: 555,
                    ..CorpusParams::default()
                },
                i,
            );
            render(&spec).expect("render").0
        })
        .collect();
    let start = Instant::now();
    let mut total_detections = 0usize;
    for frame in &frames {
        total_detections += detector.detect(frame).expect("detect").detections.len();
    }
    let elapsed = start.elapsed();
    println!(
        "latency: {:.1} ms/frame mean over {} frames ({} detections)",
        elapsed.as_secs_f64() * 1000.0 / frames.len() as f64,
        frames.len(),
        total_detections
    );
}
