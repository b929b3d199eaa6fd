//! Acceptance suite: ten end-to-end checks covering detection quality,
//! algorithmic equivalence against independent transcriptions, geometry,
//! recognition, accumulation, latency and determinism. Each check prints
//! one `[PASS]`/`[FAIL]` line (run with `-- --nocapture` to see them) and
//! the test fails if any check does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use heroscan_core::{
    accumulate_video, classify_camp, fuse_leading, maximum_filter, rank_and_score, render,
    render_corpus, shop_scene, skill_region_rect, sprite_sample, suppress, train_reference,
    BloodBarTemplate, Camp, CampVerdict, Classifier, CorpusParams, Detector, DetectorParams,
    MatchMap, NmsParams, PeakCandidate, RecognitionResult, Rect, RoiSource, ScoreParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type CheckResult = Result<String, String>;

fn heroscan() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heroscan"))
}

fn run_binary(cmd: &mut Command) -> Result<String, String> {
    let output = cmd
        .output()
        .map_err(|e| format!("spawning heroscan: {e}"))?;
    if !output.status.success() {
        return Err(format!(
            "heroscan failed: {}",
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    String::from_utf8(output.stdout).map_err(|e| format!("stdout not UTF-8: {e}"))
}

fn parse_json(stdout: &str) -> Result<Value, String> {
    serde_json::from_str(stdout).map_err(|e| format!("stdout not JSON: {e}"))
}

/// 1. On a 200-scene corpus (0-10 bars per scene, mixed fills, camps and
/// aspect ratios), `bench` must report precision and recall >= 0.99 with
/// center error <= 2 px.
fn detection_quality(corpus: &Path) -> CheckResult {
    let params = CorpusParams {
        scenes: 200,
        seed: 1001,
        ..CorpusParams::default()
    };
    let manifest = render_corpus(corpus, &params).map_err(|e| format!("rendering corpus: {e}"))?;
    let counts: Vec<usize> = manifest.scenes.iter().map(|s| s.truth.bars.len()).collect();
    let dims: std::collections::BTreeSet<(u32, u32)> = manifest
        .scenes
        .iter()
        .map(|s| (s.truth.width, s.truth.height))
        .collect();
    if *counts.iter().min().unwrap() != 0 || *counts.iter().max().unwrap() < 8 || dims.len() < 3 {
        return Err(format!(
            "corpus lacks required variety: bar counts {:?}..{:?}, {} distinct resolutions",
            counts.iter().min(),
            counts.iter().max(),
            dims.len()
        ));
    }

    let doc = parse_json(&run_binary(heroscan().arg("bench").arg(corpus))?)?;
    let precision = doc["precision"].as_f64().unwrap_or(0.0);
    let recall = doc["recall"].as_f64().unwrap_or(0.0);
    let err = doc["max_center_error_px"].as_f64().unwrap_or(f64::MAX);
    if precision >= 0.99 && recall >= 0.99 && err <= 2.0 {
        Ok(format!(
            "precision {precision:.4}, recall {recall:.4}, max center error {err:.2} px over {} truth bars in {} scenes",
            doc["truth_bars"], doc["frames"]
        ))
    } else {
        Err(format!(
            "precision {precision:.4}, recall {recall:.4}, max center error {err:.2} px"
        ))
    }
}

/// Direct double-loop transcription of the suppression procedure: walk the
/// score-descending list and mark a candidate as a duplicate when any
/// earlier still-real candidate lies within both offsets (strict `<`).
fn suppression_transcription(
    candidates: &[PeakCandidate],
    t_x: u32,
    t_y: u32,
) -> Vec<PeakCandidate> {
    let mut real = vec![true; candidates.len()];
    for i in 0..candidates.len() {
        for j in 0..i {
            if real[j]
                && (candidates[j].y as i64 - candidates[i].y as i64).unsigned_abs() < t_y as u64
                && (candidates[j].x as i64 - candidates[i].x as i64).unsigned_abs() < t_x as u64
            {
                real[i] = false;
            }
        }
    }
    candidates
        .iter()
        .zip(&real)
        .filter(|(_, &keep)| keep)
        .map(|(c, _)| *c)
        .collect()
}

/// 2. suppress() equals the independent transcription on 1,000 random
/// score-sorted candidate sets, exactly.
fn suppression_equivalence() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..1000 {
        let n = rng.gen_range(0..=20);
        let mut candidates: Vec<PeakCandidate> = (0..n)
            .map(|_| {
                let mut c =
                    PeakCandidate::new(rng.gen_range(0..200), rng.gen_range(0..100), rng.gen());
                c.score = rng.gen();
                c
            })
            .collect();
        candidates.sort_by(|a, b| b.score.total_cmp(&a.score));
        let params = NmsParams {
            t_x: rng.gen_range(0..40),
            t_y: rng.gen_range(0..4),
        };
        let got = suppress(&candidates, &params).map_err(|e| format!("case {case}: {e}"))?;
        let want = suppression_transcription(&candidates, params.t_x, params.t_y);
        if got != want {
            return Err(format!(
                "case {case}: suppress kept {} candidates, transcription kept {}",
                got.len(),
                want.len()
            ));
        }
    }
    Ok("1,000 random candidate sets (n <= 20) match the double-loop transcription exactly".into())
}

/// 3. The maximum filter equals a naive window maximum on 100 random
/// 64x64 maps, exactly.
fn maximum_filter_equivalence() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..100 {
        let values: Vec<f32> = (0..64 * 64).map(|_| rng.gen()).collect();
        let map = MatchMap::from_values(64, 64, values.clone()).unwrap();
        let radius = rng.gen_range(1..=15u32);
        let got = maximum_filter(&map, radius);
        for y in 0..64u32 {
            for x in 0..64u32 {
                let x0 = x.saturating_sub(radius);
                let x1 = (x + radius).min(63);
                let y0 = y.saturating_sub(radius);
                let y1 = (y + radius).min(63);
                let mut naive = f32::MIN;
                for wy in y0..=y1 {
                    for wx in x0..=x1 {
                        naive = naive.max(values[(wy * 64 + wx) as usize]);
                    }
                }
                if got.row(y)[x as usize] != naive {
                    return Err(format!(
                        "case {case}: radius {radius} mismatch at ({x}, {y}): {} vs naive {naive}",
                        got.row(y)[x as usize]
                    ));
                }
            }
        }
    }
    Ok("100 random 64x64 maps with radii 1..=15 equal the naive window maximum exactly".into())
}

/// Independent transcription of the camp color rules: a channel above 100
/// that exceeds 1.5x both others names the camp; otherwise all channels
/// in [70, 100] means an empty bar; otherwise the detection is rejected.
fn camp_transcription(r: f64, g: f64, b: f64) -> CampVerdict {
    let channels = [(g, Camp::SelfHero), (b, Camp::Friend), (r, Camp::Enemy)];
    for (i, &(c, camp)) in channels.iter().enumerate() {
        let others = [channels[(i + 1) % 3].0, channels[(i + 2) % 3].0];
        if c > 100.0 && others.iter().all(|&o| c > 1.5 * o) {
            return CampVerdict::Camp(camp);
        }
    }
    if [r, g, b].iter().all(|&c| (70.0..=100.0).contains(&c)) {
        CampVerdict::Camp(Camp::Unknown)
    } else {
        CampVerdict::Rejected
    }
}

/// 4. classify_camp matches the rule transcription over the whole
/// {0,5,...,255}^3 grid, and shop-style line clutter yields zero
/// detections after camp filtering.
fn camp_rules_and_clutter_rejection() -> CheckResult {
    let grid: Vec<f64> = (0..52).map(|k| k as f64 * 5.0).collect();
    let mut rejected = 0u64;
    for &r in &grid {
        for &g in &grid {
            for &b in &grid {
                let got = classify_camp(r, g, b);
                let want = camp_transcription(r, g, b);
                if got != want {
                    return Err(format!(
                        "verdicts differ at ({r}, {g}, {b}): {got:?} vs {want:?}"
                    ));
                }
                if got == CampVerdict::Rejected {
                    rejected += 1;
                }
            }
        }
    }

    let detector = Detector::new(BloodBarTemplate::builtin(), DetectorParams::default())
        .map_err(|e| e.to_string())?;
    for seed in 0..20 {
        let (image, _) = render(&shop_scene(seed)).map_err(|e| e.to_string())?;
        let result = detector.detect(&image).map_err(|e| e.to_string())?;
        if !result.detections.is_empty() {
            return Err(format!(
                "shop scene {seed} leaked {} detections through camp filtering",
                result.detections.len()
            ));
        }
    }
    Ok(format!(
        "all 140,608 grid colors match the transcription ({rejected} rejected); 20 shop scenes yield zero detections"
    ))
}

/// 5. The skill region for 1280x720 is exactly (880, 342, 360, 360), and
/// random heights/aspect ratios match the closed form to +/- 1 px.
fn skill_region_geometry() -> CheckResult {
    let frozen = skill_region_rect((1280, 720));
    if frozen != Rect::new(880, 342, 360, 360) {
        return Err(format!(
            "1280x720 gave {frozen:?}, expected (880, 342, 360, 360)"
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let h = rng.gen_range(360..=1440u32);
        // Aspect ratios from 16:9 up to ~26:9 keep the region unclamped,
        // so the closed form applies directly.
        let w = h * rng.gen_range(16..=26u32) / 9;
        let got = skill_region_rect((w, h));
        let x = 0.5 * w as f64 + 0.1875 * (h as f64 * 16.0 / 9.0);
        let y = 0.475 * h as f64;
        let side = 0.5 * h as f64;
        for (name, got_v, want) in [
            ("x", got.x as f64, x),
            ("y", got.y as f64, y),
            ("w", got.w as f64, side),
            ("h", got.h as f64, side),
        ] {
            if (got_v - want).abs() > 1.0 {
                return Err(format!(
                    "{w}x{h}: {name} = {got_v}, closed form {want:.2} (off by > 1 px)"
                ));
            }
        }
    }
    Ok(
        "frozen 1280x720 rect exact; 10 random resolutions match the closed form within 1 px"
            .into(),
    )
}

/// 6. Candidate scoring rises strictly with the center value, falls
/// strictly when any window neighbor rises, and an all-equal window
/// scores exactly alpha * v0.
fn score_properties() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let score_one = |values: &[f32], w: u32, h: u32, x: u32, y: u32, params: &ScoreParams| {
        let map = MatchMap::from_values(w, h, values.to_vec()).unwrap();
        let v0 = values[(y * w + x) as usize];
        rank_and_score(&map, vec![PeakCandidate::new(x, y, v0)], params)[0].score
    };
    for case in 0..10_000 {
        let w = rng.gen_range(8..=40u32);
        let h = rng.gen_range(8..=40u32);
        let x = rng.gen_range(0..w);
        let y = rng.gen_range(0..h);
        let params = ScoreParams {
            alpha: rng.gen_range(0.5..2.0),
            beta: rng.gen_range(1.0..6.0),
            radius: rng.gen_range(1..=12),
            top_k: 20,
            score_threshold: 0.0,
        };
        let values: Vec<f32> = (0..w * h).map(|_| rng.gen()).collect();
        let base = score_one(&values, w, h, x, y, &params);

        let mut raised = values.clone();
        raised[(y * w + x) as usize] += 0.25;
        let raised_center = score_one(&raised, w, h, x, y, &params);
        if raised_center <= base {
            return Err(format!("case {case}: raising v0 did not raise the score"));
        }

        // Any in-window cell other than the center.
        let (x0, x1) = (
            x.saturating_sub(params.radius),
            (x + params.radius).min(w - 1),
        );
        let (y0, y1) = (
            y.saturating_sub(params.radius),
            (y + params.radius).min(h - 1),
        );
        let neighbor = loop {
            let nx = rng.gen_range(x0..=x1);
            let ny = rng.gen_range(y0..=y1);
            if (nx, ny) != (x, y) {
                break (ny * w + nx) as usize;
            }
        };
        let mut raised = values.clone();
        raised[neighbor] += 0.25;
        let raised_neighbor = score_one(&raised, w, h, x, y, &params);
        if raised_neighbor >= base {
            return Err(format!(
                "case {case}: raising a neighbor did not lower the score"
            ));
        }

        let level: f32 = rng.gen();
        let flat = vec![level; (w * h) as usize];
        let flat_score = score_one(&flat, w, h, x, y, &params);
        let expected = (params.alpha * level as f64) as f32;
        if flat_score != expected {
            return Err(format!(
                "case {case}: all-equal window scored {flat_score}, expected exactly {expected}"
            ));
        }
    }
    Ok("10,000 random windows: strict monotonicity both ways; flat windows score exactly alpha * v0".into())
}

/// 7. A model trained on 20 sprite classes x 50 noisy renders reaches
/// >= 0.95 held-out top-1, and fusion recovers the truth whenever two of
/// three rankings are right at >= 0.8 and the third is wrong at <= 0.5.
fn recognition_and_fusion() -> CheckResult {
    let labels: Vec<String> = (0..20).map(|i| format!("hero{i:02}")).collect();
    let mut train = Vec::new();
    let mut eval = Vec::new();
    for (li, label) in labels.iter().enumerate() {
        for s in 0..50u64 {
            let image = sprite_sample(label, 64, li as u64 * 1_000 + s);
            if s < 40 {
                train.push((label.clone(), image));
            } else {
                eval.push((label.clone(), image));
            }
        }
    }
    let model = train_reference(&train, &labels).map_err(|e| e.to_string())?;
    let mut hits = 0usize;
    for (label, image) in &eval {
        let ranking = model.classify(image).map_err(|e| e.to_string())?;
        if ranking.first().map(|(top, _)| top) == Some(label) {
            hits += 1;
        }
    }
    let accuracy = hits as f64 / eval.len() as f64;
    if accuracy < 0.95 {
        return Err(format!("held-out top-1 accuracy {accuracy:.4} < 0.95"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..300 {
        let truth = &labels[rng.gen_range(0..labels.len())];
        let decoy = loop {
            let d = &labels[rng.gen_range(0..labels.len())];
            if d != truth {
                break d;
            }
        };
        let correct = |rng: &mut ChaCha8Rng| {
            let c = rng.gen_range(0.8..=1.0f32);
            vec![(truth.clone(), c), (decoy.clone(), rng.gen_range(0.0..0.1))]
        };
        let diverted = rng.gen_range(0.2..=0.5f32);
        let wrong = vec![
            (decoy.clone(), diverted),
            (truth.clone(), rng.gen_range(0.0..diverted)),
        ];
        let mut rankings = [correct(&mut rng), correct(&mut rng), wrong];
        rankings.rotate_right(case % 3);
        let [a, s, f] = rankings;
        let fused = fuse_leading(&a, Some(&s[..]), Some(&f[..]), 0.5);
        if fused.label != *truth {
            return Err(format!(
                "case {case}: fusion picked {:?} over {truth:?} with one wrong ranking",
                fused.label
            ));
        }
    }
    Ok(format!(
        "held-out top-1 accuracy {accuracy:.4} over 20 classes; 300 two-of-three fusion cases all recover the truth"
    ))
}

/// 8. Over 300 frames where the true hero wins 60% at confidence 0.9 and
/// a decoy wins 40% at 0.6, the video summary ranks the true hero first.
fn video_ranking() -> CheckResult {
    let results = (0..300).map(|i| {
        let (label, confidence) = if i % 5 < 3 {
            ("truehero", 0.9f32)
        } else {
            ("decoy", 0.6f32)
        };
        (
            Camp::SelfHero,
            RecognitionResult {
                label: label.into(),
                confidence,
                source: RoiSource::Fused,
            },
        )
    });
    let summary = accumulate_video(results);
    let tallies = summary
        .camps
        .get(&Camp::SelfHero)
        .ok_or("summary has no self-hero group")?;
    match tallies.first() {
        Some(top) if top.label == "truehero" => Ok(format!(
            "true hero leads with accumulated confidence {:.1} over the decoy's {:.1}",
            top.confidence, tallies[1].confidence
        )),
        other => Err(format!("top self-hero tally is {other:?}")),
    }
}

/// 9. Mean full-pipeline detection latency on 1280x720 frames stays
/// within 160 ms, measured by `bench` over 100 frames.
fn detection_latency(corpus: &Path) -> CheckResult {
    let doc = parse_json(&run_binary(heroscan().arg("bench").arg(corpus))?)?;
    let frames = doc["frames"].as_u64().unwrap_or(0);
    let mean = doc["mean_ms"].as_f64().unwrap_or(f64::MAX);
    let p99 = doc["p99_ms"].as_f64().unwrap_or(f64::MAX);
    if frames >= 100 && mean <= 160.0 {
        Ok(format!(
            "mean {mean:.1} ms (p99 {p99:.1} ms) per 1280x720 frame over {frames} frames"
        ))
    } else {
        Err(format!(
            "mean {mean:.1} ms over {frames} frames exceeds the 160 ms budget"
        ))
    }
}

/// 10. Running `detect` twice over the same corpus produces byte-identical
/// JSON.
fn detection_determinism(corpus: &Path) -> CheckResult {
    let mut frames: Vec<PathBuf> = std::fs::read_dir(corpus.join("frames"))
        .map_err(|e| e.to_string())?
        .map(|entry| entry.unwrap().path())
        .collect();
    frames.sort();
    let first = run_binary(heroscan().arg("detect").args(&frames).args(["--jobs", "4"]))?;
    let second = run_binary(heroscan().arg("detect").args(&frames).args(["--jobs", "4"]))?;
    if first == second {
        Ok(format!(
            "two runs over {} frames printed identical bytes ({} bytes of JSON)",
            frames.len(),
            first.len()
        ))
    } else {
        Err("outputs differ between runs".into())
    }
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_mixed = dir.path().join("corpus_mixed");
    let corpus_720 = dir.path().join("corpus_720");
    render_corpus(
        &corpus_720,
        &CorpusParams {
            scenes: 100,
            seed: 7777,
            dims: vec![(1280, 720)],
            ..CorpusParams::default()
        },
    )
    .expect("render 720p corpus");

    let latency_corpus = corpus_720.clone();
    let checks: Vec<(&str, Box<dyn FnOnce() -> CheckResult>)> = vec![
        (
            "corpus detection quality",
            Box::new(move || detection_quality(&corpus_mixed)),
        ),
        (
            "duplicate suppression equivalence",
            Box::new(suppression_equivalence),
        ),
        (
            "maximum filter equivalence",
            Box::new(maximum_filter_equivalence),
        ),
        (
            "camp rules and clutter rejection",
            Box::new(camp_rules_and_clutter_rejection),
        ),
        ("skill region geometry", Box::new(skill_region_geometry)),
        ("candidate score properties", Box::new(score_properties)),
        (
            "recognition accuracy and fusion",
            Box::new(recognition_and_fusion),
        ),
        ("video ranking under noise", Box::new(video_ranking)),
        (
            "detection latency",
            Box::new(move || detection_latency(&latency_corpus)),
        ),
        (
            "deterministic detection output",
            Box::new(move || detection_determinism(&corpus_720)),
        ),
    ];

    let mut failures = Vec::new();
    for (index, (name, check)) in checks.into_iter().enumerate() {
        let number = index + 1;
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {number}. {name} — {detail}"),
            Err(detail) => {
                println!("[FAIL] {number}. {name} — {detail}");
                failures.push(format!("{number}. {name}: {detail}"));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "failed acceptance checks:\n{}",
        failures.join("\n")
    );
}
